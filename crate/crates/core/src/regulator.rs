//! Clamped state-feedback regulating law and its stability region.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::plant::PlantParams;

/// Feedback gain `k` and feedforward gain `n`, with `0 <= k <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGains", into = "RawGains")]
pub struct RegulatorGains {
    k: f64,
    n: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGains {
    #[serde(alias = "K")]
    k: f64,
    #[serde(alias = "N")]
    n: f64,
}

impl TryFrom<RawGains> for RegulatorGains {
    type Error = Error;

    fn try_from(raw: RawGains) -> Result<Self> {
        RegulatorGains::new(raw.k, raw.n)
    }
}

impl From<RegulatorGains> for RawGains {
    fn from(g: RegulatorGains) -> Self {
        RawGains { k: g.k, n: g.n }
    }
}

impl RegulatorGains {
    pub fn new(k: f64, n: f64) -> Result<Self> {
        if !k.is_finite() || !n.is_finite() {
            return Err(Error::invalid("gains", "must be finite"));
        }
        if k < 0.0 || n < 0.0 {
            return Err(Error::invalid(
                "gains",
                format!("must be nonnegative, got K={k}, N={n}"),
            ));
        }
        if n < k {
            return Err(Error::invalid("gains", format!("N must be >= K, got K={k}, N={n}")));
        }
        Ok(RegulatorGains { k, n })
    }

    pub fn zero() -> Self {
        RegulatorGains { k: 0.0, n: 0.0 }
    }

    /// Nearest admissible pair: negatives clamp to zero, then `n` is raised
    /// to `k` if it sits below it.
    pub fn projected(k: f64, n: f64) -> Self {
        let k = k.max(0.0);
        RegulatorGains { k, n: n.max(k) }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Feedforward share `N - K`.
    pub fn offset(&self) -> f64 {
        self.n - self.k
    }
}

/// Control input for error `e` and reference `r`; zero whenever `e <= 0`.
pub fn control_output(gains: &RegulatorGains, e: f64, r: f64) -> Result<f64> {
    ensure_finite(e, "regulating error")?;
    ensure_finite(r, "reference")?;
    if e <= 0.0 {
        return Ok(0.0);
    }
    let u = gains.k * e + (gains.n - gains.k) * r;
    Ok(ensure_finite(u, "control output")?.max(0.0))
}

/// The `N - K` offset `(1 - a) / b` that removes steady-state error.
pub fn feedforward_offset(params: &PlantParams) -> f64 {
    (1.0 - params.a()) / params.b()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    /// `|a - bK| < 1`
    pub contraction: bool,
    /// `0 < K < (1 + a) / b`
    pub gain_ceiling: bool,
    /// `0 < K <= N < inf`
    pub ordering: bool,
    pub contraction_factor: f64,
    pub k_ceiling: f64,
}

impl StabilityVerdict {
    pub fn passed(&self) -> bool {
        self.contraction && self.gain_ceiling && self.ordering
    }
}

pub fn stability_check(params: &PlantParams, gains: &RegulatorGains) -> StabilityVerdict {
    let (a, b) = (params.a(), params.b());
    let factor = a - b * gains.k;
    let ceiling = (1.0 + a) / b;
    StabilityVerdict {
        contraction: factor.abs() < 1.0,
        gain_ceiling: gains.k > 0.0 && gains.k < ceiling,
        ordering: gains.k > 0.0 && gains.k <= gains.n && gains.n.is_finite(),
        contraction_factor: factor,
        k_ceiling: ceiling,
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::invalid(
                "interval",
                format!("[{lo}, {hi}] is not a valid interval"),
            ));
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Gain ranges implied by an uncertain plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBounds {
    pub k: Interval,
    pub n: Interval,
    /// Range of the steady-state offset `N - K`.
    pub offset: Interval,
}

impl GainBounds {
    pub fn new(k: Interval, n: Interval) -> Result<Self> {
        if k.lo < 0.0 || n.lo < 0.0 {
            return Err(Error::invalid("bounds", "gain bounds must be nonnegative"));
        }
        Ok(GainBounds {
            k,
            n,
            offset: Interval {
                lo: 0.0,
                hi: (n.hi - k.lo).max(0.0),
            },
        })
    }
}

/// Worst-case gain ranges for `a in [a_lo, a_hi]`, `b in [b_lo, b_hi]`.
///
/// `K` runs from 0 to the tightest stability ceiling `(1 + a_lo) / b_hi`;
/// `N` is that range shifted by the span of feedforward offsets
/// `[(1 - a_hi) / b_hi, (1 - a_lo) / b_lo]`.
pub fn bounds_from_uncertainty(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Result<GainBounds> {
    let a = Interval::new(a_lo, a_hi)?;
    let b = Interval::new(b_lo, b_hi)?;
    if a.lo <= -1.0 || a.hi >= 1.0 {
        return Err(Error::invalid("a", "interval must lie inside (-1, 1)"));
    }
    if b.lo <= 0.0 {
        return Err(Error::invalid("b", "interval must be strictly positive"));
    }
    let k = Interval {
        lo: 0.0,
        hi: (1.0 + a.lo) / b.hi,
    };
    let offset = Interval {
        lo: (1.0 - a.hi) / b.hi,
        hi: (1.0 - a.lo) / b.lo,
    };
    Ok(GainBounds {
        k,
        n: Interval {
            lo: k.lo + offset.lo,
            hi: k.hi + offset.hi,
        },
        offset,
    })
}
