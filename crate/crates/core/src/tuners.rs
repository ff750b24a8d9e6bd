//! Derivative-free tuners working on an episode-cost oracle.
//!
//! All entry points minimize. Hill climbing is usually stated for
//! maximization; minimizing a cost is the same search on the negated cost.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden ratio `(1 + sqrt 5) / 2`.
pub const PHI: f64 = 1.618_033_988_749_895;
/// Interval shrink factor per golden-section iteration.
pub const INV_PHI: f64 = 1.0 / PHI;

pub const GSS_MAX_ITERATIONS: usize = 1_000_000;
pub const SHC_MAX_ITERATIONS: usize = 100_000;

/// Cost function plus an exact count of how often it was evaluated.
pub struct CostOracle<F> {
    cost: F,
    evaluations: usize,
}

impl<F> CostOracle<F>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    pub fn new(cost: F) -> Self {
        CostOracle { cost, evaluations: 0 }
    }

    pub fn eval(&mut self, point: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let value = (self.cost)(point)?;
        if !value.is_finite() {
            return Err(Error::NonFinite("oracle cost"));
        }
        Ok(value)
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

/// Oracle over an infallible cost function.
pub fn oracle<G>(mut cost: G) -> CostOracle<impl FnMut(&[f64]) -> Result<f64>>
where
    G: FnMut(&[f64]) -> f64,
{
    CostOracle::new(move |p: &[f64]| Ok(cost(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchInterval {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

impl SearchInterval {
    pub fn new(lower: f64, upper: f64, tolerance: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::invalid(
                "interval",
                format!("need lower < upper, got [{lower}, {upper}]"),
            ));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::invalid("tolerance", format!("must be > 0, got {tolerance}")));
        }
        Ok(SearchInterval {
            lower,
            upper,
            tolerance,
        })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSection {
    pub point: f64,
    pub iterations: usize,
    /// Width of the final bracket.
    pub width: f64,
}

pub fn golden_section_1d<F>(oracle: &mut CostOracle<F>, interval: SearchInterval) -> Result<GoldenSection>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let (mut lo, mut hi) = (interval.lower, interval.upper);
    let mut width = hi - lo;
    let mut iterations = 0;
    while width > interval.tolerance {
        if iterations == GSS_MAX_ITERATIONS {
            return Err(Error::IterationLimit {
                method: "golden-section search",
                limit: GSS_MAX_ITERATIONS,
            });
        }
        let low_probe = hi - INV_PHI * width;
        let high_probe = lo + INV_PHI * width;
        if oracle.eval(&[low_probe])? < oracle.eval(&[high_probe])? {
            hi = high_probe;
        } else {
            lo = low_probe;
        }
        width = hi - lo;
        iterations += 1;
    }
    Ok(GoldenSection {
        point: 0.5 * (lo + hi),
        iterations,
        width,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSection2d {
    pub point: (f64, f64),
    pub iterations: usize,
    pub widths: (f64, f64),
}

/// Coordinate-alternating golden-section search.
///
/// Each pass shrinks the `x` bracket with `y` held at its latest probe, then
/// the `y` bracket with `x` held at the probe just kept. Both held
/// coordinates start at their interval midpoints.
pub fn golden_section_2d<F>(
    oracle: &mut CostOracle<F>,
    x_interval: SearchInterval,
    y_interval: SearchInterval,
) -> Result<GoldenSection2d>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let (mut xa, mut xb) = (x_interval.lower, x_interval.upper);
    let (mut ya, mut yb) = (y_interval.lower, y_interval.upper);
    let (mut dx, mut dy) = (xb - xa, yb - ya);
    let mut x_held = x_interval.midpoint();
    let mut y_held = y_interval.midpoint();
    let mut iterations = 0;

    while dx > x_interval.tolerance || dy > y_interval.tolerance {
        if iterations == GSS_MAX_ITERATIONS {
            return Err(Error::IterationLimit {
                method: "2-D golden-section search",
                limit: GSS_MAX_ITERATIONS,
            });
        }
        if dx > x_interval.tolerance {
            let xl = xb - INV_PHI * dx;
            let xh = xa + INV_PHI * dx;
            if oracle.eval(&[xl, y_held])? < oracle.eval(&[xh, y_held])? {
                xb = xh;
                x_held = xl;
            } else {
                xa = xl;
                x_held = xh;
            }
        }
        if dy > y_interval.tolerance {
            let yl = yb - INV_PHI * dy;
            let yh = ya + INV_PHI * dy;
            if oracle.eval(&[x_held, yl])? < oracle.eval(&[x_held, yh])? {
                yb = yh;
                y_held = yl;
            } else {
                ya = yl;
                y_held = yh;
            }
        }
        dx = xb - xa;
        dy = yb - ya;
        iterations += 1;
    }
    Ok(GoldenSection2d {
        point: (x_held, y_held),
        iterations,
        widths: (dx, dy),
    })
}

/// `{point +/- s e_i}`: the `2n` axis neighbors, ordered `+e_1, -e_1, +e_2, ...`.
pub fn shc_neighbors(point: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * point.len());
    for i in 0..point.len() {
        for sign in [1.0, -1.0] {
            let mut y = point.to_vec();
            y[i] += sign * step;
            out.push(y);
        }
    }
    out
}

/// Distribution of the random step multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepDistribution {
    /// Uniform on `[low, high)`.
    Uniform { low: f64, high: f64 },
    /// Always the same multiplier.
    Fixed { value: f64 },
}

impl StepDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            StepDistribution::Uniform { low, high } => 0.5 * (low + high),
            StepDistribution::Fixed { value } => value,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            StepDistribution::Uniform { low, high } if high > low => rng.gen_range(low..high),
            StepDistribution::Uniform { low, .. } => low,
            StepDistribution::Fixed { value } => value,
        }
    }
}

impl Default for StepDistribution {
    fn default() -> Self {
        StepDistribution::Uniform { low: 0.0, high: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillClimbConfig {
    pub step: f64,
    #[serde(default)]
    pub distribution: StepDistribution,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "default_shc_iterations")]
    pub max_iterations: usize,
}

fn default_shc_iterations() -> usize {
    SHC_MAX_ITERATIONS
}

impl HillClimbConfig {
    pub fn new(step: f64) -> Self {
        HillClimbConfig {
            step,
            distribution: StepDistribution::default(),
            threshold: 0.0,
            max_iterations: SHC_MAX_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid("step", format!("must be > 0, got {}", self.step)));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::invalid("threshold", "must be >= 0"));
        }
        if let StepDistribution::Uniform { low, high } = self.distribution {
            if !(low.is_finite() && high.is_finite() && low <= high) {
                return Err(Error::invalid(
                    "distribution",
                    "uniform bounds must satisfy low <= high",
                ));
            }
        }
        let mean = self.distribution.mean();
        if mean.is_nan() || mean <= 0.0 {
            return Err(Error::invalid("distribution", "expected value must be positive"));
        }
        Ok(())
    }
}

/// Best of `current` and its neighbors, keeping the earliest on ties.
fn best_neighbor<F>(
    oracle: &mut CostOracle<F>,
    current: &[f64],
    current_cost: f64,
    step: f64,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut best = current.to_vec();
    let mut best_cost = current_cost;
    for z in shc_neighbors(current, step) {
        let c = oracle.eval(&z)?;
        if c < best_cost {
            best = z;
            best_cost = c;
        }
    }
    Ok((best, best_cost))
}

/// Offline stochastic hill climbing; stops once the best neighbor improves
/// on the current point by no more than `cfg.threshold`.
pub fn shc_offline<F, R>(
    oracle: &mut CostOracle<F>,
    start: &[f64],
    cfg: &HillClimbConfig,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut x = start.to_vec();
    for _ in 0..cfg.max_iterations {
        let fx = oracle.eval(&x)?;
        let (best, best_cost) = best_neighbor(oracle, &x, fx, cfg.step)?;
        let improvement = fx - best_cost;
        if improvement <= cfg.threshold {
            return Ok(x);
        }
        let r = cfg.distribution.draw(rng);
        for (xi, yi) in x.iter_mut().zip(&best) {
            *xi += r * (yi - *xi);
        }
    }
    Err(Error::IterationLimit {
        method: "stochastic hill climbing",
        limit: cfg.max_iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillClimbStep {
    pub point: Vec<f64>,
    /// Best of the evaluated points.
    pub best: Vec<f64>,
    pub best_cost: f64,
    pub current_cost: f64,
    /// Multiplier drawn for this step; `None` when the current point was best.
    pub draw: Option<f64>,
}

/// One online update: `2n + 1` evaluations, then a random fraction of the
/// move toward the best point.
pub fn shc_online_step<F, R>(
    oracle: &mut CostOracle<F>,
    current: &[f64],
    cfg: &HillClimbConfig,
    rng: &mut R,
) -> Result<HillClimbStep>
where
    F: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let current_cost = oracle.eval(current)?;
    let (best, best_cost) = best_neighbor(oracle, current, current_cost, cfg.step)?;
    if best.as_slice() == current {
        return Ok(HillClimbStep {
            point: current.to_vec(),
            best,
            best_cost,
            current_cost,
            draw: None,
        });
    }
    let r = cfg.distribution.draw(rng);
    let point = current.iter().zip(&best).map(|(x, y)| x + r * (y - x)).collect();
    Ok(HillClimbStep {
        point,
        best,
        best_cost,
        current_cost,
        draw: Some(r),
    })
}
