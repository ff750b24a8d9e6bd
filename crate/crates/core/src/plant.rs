//! First-order passive unidirectional plant.
//!
//! The state advances as `a*x + b*u` while the input is positive and decays
//! as `f*x` when the input is zero. Negative inputs are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Plant coefficients and sampling period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlantParams", into = "RawPlantParams")]
pub struct PlantParams {
    a: f64,
    b: f64,
    c: f64,
    f: f64,
    sample_period: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPlantParams {
    a: f64,
    b: f64,
    #[serde(default = "one")]
    c: f64,
    f: f64,
    #[serde(alias = "T")]
    sample_period: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawPlantParams> for PlantParams {
    type Error = Error;

    fn try_from(raw: RawPlantParams) -> Result<Self> {
        PlantParams::new(raw.a, raw.b, raw.c, raw.f, raw.sample_period)
    }
}

impl From<PlantParams> for RawPlantParams {
    fn from(p: PlantParams) -> Self {
        RawPlantParams {
            a: p.a,
            b: p.b,
            c: p.c,
            f: p.f,
            sample_period: p.sample_period,
        }
    }
}

impl PlantParams {
    pub fn new(a: f64, b: f64, c: f64, f: f64, sample_period: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("f", f), ("T", sample_period)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if a.abs() >= 1.0 {
            return Err(Error::invalid("a", format!("|a| must be < 1, got {a}")));
        }
        if f.abs() >= 1.0 {
            return Err(Error::invalid("f", format!("|f| must be < 1, got {f}")));
        }
        if b <= 0.0 {
            return Err(Error::invalid("b", format!("must be > 0, got {b}")));
        }
        if sample_period <= 0.0 {
            return Err(Error::invalid("T", format!("must be > 0, got {sample_period}")));
        }
        Ok(PlantParams {
            a,
            b,
            c,
            f,
            sample_period,
        })
    }

    /// Twisted-and-coiled polymer muscle identified at a 0.1 s sampling period.
    pub fn tcp_muscle() -> Self {
        PlantParams {
            a: 0.98195,
            b: 0.00042345,
            c: 1.0,
            f: 0.98195,
            sample_period: 0.1,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    pub x: f64,
    pub k: u64,
}

impl PlantState {
    pub fn at_rest() -> Self {
        PlantState::default()
    }
}

/// Linear per-step ramp on `a` and `b`, used to emulate slow ageing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftSchedule {
    #[serde(default)]
    pub a_rate: f64,
    #[serde(default)]
    pub b_rate: f64,
    #[serde(default)]
    pub active: bool,
}

impl DriftSchedule {
    pub fn inactive() -> Self {
        DriftSchedule::default()
    }

    pub fn ramp(a_rate: f64, b_rate: f64) -> Self {
        DriftSchedule {
            a_rate,
            b_rate,
            active: true,
        }
    }
}

pub fn plant_step(params: &PlantParams, state: PlantState, u: f64) -> Result<PlantState> {
    ensure_finite(u, "plant input")?;
    ensure_finite(state.x, "plant state")?;
    if u < 0.0 {
        return Err(Error::NegativeInput(u));
    }
    let x = if u > 0.0 {
        params.a * state.x + params.b * u
    } else {
        params.f * state.x
    };
    Ok(PlantState {
        x: ensure_finite(x, "plant state")?,
        k: state.k + 1,
    })
}

pub fn plant_output(params: &PlantParams, state: &PlantState) -> f64 {
    params.c * state.x
}

/// Parameters in effect at step `k`. Fails once the ramp leaves the
/// passive region (`|a| >= 1` or `b <= 0`).
pub fn apply_drift(params: &PlantParams, schedule: &DriftSchedule, k: u64) -> Result<PlantParams> {
    if !schedule.active {
        return Ok(*params);
    }
    let steps = k as f64;
    let a = params.a + schedule.a_rate * steps;
    let b = params.b + schedule.b_rate * steps;
    if !a.is_finite() || !b.is_finite() || a.abs() >= 1.0 || b <= 0.0 {
        return Err(Error::DriftOutOfRange { step: k, a, b });
    }
    Ok(PlantParams { a, b, ..*params })
}
