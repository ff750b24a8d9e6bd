//! Associated search element: a pair of FIFO buffers over recent
//! `(reference, error)` samples that decides whether one regulator gain may
//! be updated, in which direction and with what step size. The update itself
//! is a single stochastic hill-climbing move on that gain.
//!
//! Evaluation runs only on full buffers. Every evaluation ends in exactly one
//! of ten outcomes ([`AseBranch`]): six reject the window and slide it by one
//! sample, four emit a decision and flush both buffers.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regulator::RegulatorGains;

/// Which steady-state proximity measure feeds the K-versus-N priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaVariant {
    /// `-mean(diff(E)) / mean(E)`
    #[default]
    MeanDiff,
    /// `-max(diff(E)) / mean(E)`
    MaxDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AseConfig {
    /// Step sizes `beta_1..beta_5`: N down on all-negative errors, K down on a
    /// sign change, K down on a peaky output, K up, N up.
    pub steps: [f64; 5],
    /// Bound on `max(U) / mean(U)`; must exceed 1.
    pub gamma: f64,
    /// Error threshold below which a window carries no information.
    pub epsilon: f64,
    /// Weight on the uniform draw compared against the priority measure.
    /// A pure first-order decay gives a priority of roughly `1 - a` over a
    /// short window, so the weight should sit on that scale.
    pub rho: f64,
    /// Buffer length in samples.
    pub capacity: usize,
    pub omega: OmegaVariant,
}

impl Default for AseConfig {
    fn default() -> Self {
        AseConfig {
            steps: [2.0, 2.0, 2.0, 5.0, 10.0],
            gamma: 1.1,
            epsilon: 0.01,
            rho: 0.02,
            capacity: 10,
            omega: OmegaVariant::MeanDiff,
        }
    }
}

impl AseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("steps", "all step sizes must be > 0"));
        }
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::invalid("gamma", format!("must be > 1, got {}", self.gamma)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::invalid("rho", format!("must be > 0, got {}", self.rho)));
        }
        if self.capacity < 4 {
            return Err(Error::invalid(
                "capacity",
                format!("must be >= 4, got {}", self.capacity),
            ));
        }
        Ok(())
    }

    pub fn k_up(&self) -> f64 {
        self.steps[3]
    }

    pub fn n_up(&self) -> f64 {
        self.steps[4]
    }
}

/// Reference and error windows, oldest sample first.
#[derive(Debug, Clone, PartialEq)]
pub struct AseBuffers {
    capacity: usize,
    r: VecDeque<f64>,
    e: VecDeque<f64>,
}

impl AseBuffers {
    pub fn new(capacity: usize) -> Self {
        AseBuffers {
            capacity,
            r: VecDeque::with_capacity(capacity),
            e: VecDeque::with_capacity(capacity),
        }
    }

    pub fn from_samples(capacity: usize, r: &[f64], e: &[f64]) -> Result<Self> {
        if r.len() != e.len() {
            return Err(Error::invalid(
                "buffers",
                "reference and error windows differ in length",
            ));
        }
        let mut b = AseBuffers::new(capacity);
        for (ri, ei) in r.iter().zip(e) {
            b.push(*ri, *ei)?;
        }
        Ok(b)
    }

    pub fn push(&mut self, r: f64, e: f64) -> Result<()> {
        if self.is_full() {
            return Err(Error::BufferFull(self.capacity));
        }
        self.r.push_back(r);
        self.e.push_back(e);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.r.len() >= self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn references(&self) -> &VecDeque<f64> {
        &self.r
    }

    pub fn errors(&self) -> &VecDeque<f64> {
        &self.e
    }

    fn dequeue(&mut self) {
        self.r.pop_front();
        self.e.pop_front();
    }

    fn flush(&mut self) {
        self.r.clear();
        self.e.clear();
    }
}

/// Outcome of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AseBranch {
    /// Buffers not yet full; nothing evaluated.
    Filling,
    NegativeReference,
    DescendingReference,
    LeadingZeroReference,
    NonPositiveOutput,
    LeadingErrorNotPositive,
    BelowThreshold,
    /// Every error negative: lower N.
    AllErrorsNegative,
    /// Error changed sign inside the window: lower K.
    ErrorSignChange,
    /// Output peak too far above its mean: lower K.
    OutputPeakRatio,
    /// Clean positive window: raise K or N by priority.
    Priority,
}

impl AseBranch {
    pub const REJECTS: [AseBranch; 6] = [
        AseBranch::NegativeReference,
        AseBranch::DescendingReference,
        AseBranch::LeadingZeroReference,
        AseBranch::NonPositiveOutput,
        AseBranch::LeadingErrorNotPositive,
        AseBranch::BelowThreshold,
    ];

    pub const DECISIONS: [AseBranch; 4] = [
        AseBranch::AllErrorsNegative,
        AseBranch::ErrorSignChange,
        AseBranch::OutputPeakRatio,
        AseBranch::Priority,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            AseBranch::Filling => "filling",
            AseBranch::NegativeReference => "negative-reference",
            AseBranch::DescendingReference => "descending-reference",
            AseBranch::LeadingZeroReference => "leading-zero-reference",
            AseBranch::NonPositiveOutput => "non-positive-output",
            AseBranch::LeadingErrorNotPositive => "leading-error-not-positive",
            AseBranch::BelowThreshold => "below-threshold",
            AseBranch::AllErrorsNegative => "all-errors-negative",
            AseBranch::ErrorSignChange => "error-sign-change",
            AseBranch::OutputPeakRatio => "output-peak-ratio",
            AseBranch::Priority => "priority",
        }
    }

    pub fn is_reject(&self) -> bool {
        AseBranch::REJECTS.contains(self)
    }

    pub fn is_decision(&self) -> bool {
        AseBranch::DECISIONS.contains(self)
    }
}

impl fmt::Display for AseBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Eligibility, direction and step size for one gain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GainMove {
    pub eligible: bool,
    /// -1, 0 or +1.
    pub direction: i8,
    pub step: f64,
}

impl GainMove {
    fn new(direction: i8, step: f64) -> Self {
        GainMove {
            eligible: true,
            direction,
            step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AseDecision {
    pub k: GainMove,
    pub n: GainMove,
    pub branch: AseBranch,
    pub omega: Option<f64>,
    pub xi: Option<f64>,
}

impl AseDecision {
    fn none(branch: AseBranch) -> Self {
        AseDecision {
            k: GainMove::default(),
            n: GainMove::default(),
            branch,
            omega: None,
            xi: None,
        }
    }

    fn move_k(branch: AseBranch, direction: i8, step: f64) -> Self {
        AseDecision {
            k: GainMove::new(direction, step),
            ..AseDecision::none(branch)
        }
    }

    fn move_n(branch: AseBranch, direction: i8, step: f64) -> Self {
        AseDecision {
            n: GainMove::new(direction, step),
            ..AseDecision::none(branch)
        }
    }

    pub fn is_eligible(&self) -> bool {
        self.k.eligible || self.n.eligible
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega {
    pub value: f64,
    /// Set when `mean(E) == 0` and the value was forced to zero.
    pub degenerate: bool,
}

pub fn omega(errors: &[f64], variant: OmegaVariant) -> Omega {
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    if n < 2 || mean == 0.0 {
        return Omega {
            value: 0.0,
            degenerate: mean == 0.0,
        };
    }
    let diffs = errors.windows(2).map(|w| w[1] - w[0]);
    let spread = match variant {
        OmegaVariant::MeanDiff => diffs.sum::<f64>() / (n - 1) as f64,
        OmegaVariant::MaxDiff => diffs.fold(f64::NEG_INFINITY, f64::max),
    };
    Omega {
        value: -spread / mean,
        degenerate: false,
    }
}

/// Evaluate the buffers against the current gains.
///
/// Rejections drop the oldest sample from both buffers; decisions flush them.
/// Not-full buffers are left untouched.
pub fn ase_evaluate<R: Rng + ?Sized>(
    buffers: &mut AseBuffers,
    gains: &RegulatorGains,
    cfg: &AseConfig,
    rng: &mut R,
) -> Result<AseDecision> {
    if !buffers.is_full() {
        return Ok(AseDecision::none(AseBranch::Filling));
    }
    if buffers.r.iter().chain(&buffers.e).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ASE buffer"));
    }
    let decision = classify(buffers, gains, cfg, rng);
    if decision.branch.is_reject() {
        buffers.dequeue();
    } else {
        buffers.flush();
    }
    Ok(decision)
}

fn classify<R: Rng + ?Sized>(
    buffers: &AseBuffers,
    gains: &RegulatorGains,
    cfg: &AseConfig,
    rng: &mut R,
) -> AseDecision {
    let r: Vec<f64> = buffers.r.iter().copied().collect();
    let e: Vec<f64> = buffers.e.iter().copied().collect();
    let [beta1, beta2, beta3, beta4, beta5] = cfg.steps;

    if r.iter().any(|&v| v < 0.0) {
        return AseDecision::none(AseBranch::NegativeReference);
    }
    if r.windows(2).any(|w| w[1] < w[0]) {
        return AseDecision::none(AseBranch::DescendingReference);
    }
    let half = r.len().div_ceil(2);
    if r[..half].iter().all(|&v| v == 0.0) {
        return AseDecision::none(AseBranch::LeadingZeroReference);
    }
    let (k, n) = (gains.k(), gains.n());
    let u: Vec<f64> = e.iter().zip(&r).map(|(ei, ri)| k * ei + (n - k) * ri).collect();
    if u[0] < 0.0 {
        return AseDecision::none(AseBranch::NonPositiveOutput);
    }
    if e.iter().all(|&v| v < 0.0) {
        return AseDecision::move_n(AseBranch::AllErrorsNegative, -1, beta1);
    }
    if e[0] <= 0.0 || e[1] <= 0.0 {
        return AseDecision::none(AseBranch::LeadingErrorNotPositive);
    }
    if e.iter().any(|&v| v < 0.0) {
        return AseDecision::move_k(AseBranch::ErrorSignChange, -1, beta2);
    }
    if e.iter().any(|&v| v <= cfg.epsilon) {
        return AseDecision::none(AseBranch::BelowThreshold);
    }
    let u_max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let u_mean = u.iter().sum::<f64>() / u.len() as f64;
    if u_max > cfg.gamma * u_mean {
        return AseDecision::move_k(AseBranch::OutputPeakRatio, -1, beta3);
    }
    let om = omega(&e, cfg.omega).value;
    let xi: f64 = rng.gen_range(0.0..1.0);
    let mut d = if om > cfg.rho * xi {
        AseDecision::move_k(AseBranch::Priority, 1, beta4)
    } else {
        AseDecision::move_n(AseBranch::Priority, 1, beta5)
    };
    d.omega = Some(om);
    d.xi = Some(xi);
    d
}

/// Stochastic hill-climbing move on one gain; returns the new value and the
/// multiplier drawn (if any). Results are clamped at zero.
pub fn shc_update<R: Rng + ?Sized>(value: f64, mv: &GainMove, rng: &mut R) -> (f64, Option<f64>) {
    if !mv.eligible || mv.direction == 0 {
        return (value, None);
    }
    let w: f64 = rng.gen_range(0.0..1.0);
    let delta = w * mv.step;
    let next = if mv.direction > 0 { value + delta } else { value - delta };
    (next.max(0.0), Some(w))
}

/// Apply a decision to the gains. Only the eligible gain moves; if that move
/// would break `N >= K` the moved gain is pinned to the other one.
pub fn adapt_gains<R: Rng + ?Sized>(
    gains: &RegulatorGains,
    decision: &AseDecision,
    rng: &mut R,
) -> (RegulatorGains, Option<f64>) {
    let (k, n) = (gains.k(), gains.n());
    if decision.k.eligible {
        let (k_new, w) = shc_update(k, &decision.k, rng);
        return (RegulatorGains::projected(k_new.min(n), n), w);
    }
    if decision.n.eligible {
        let (n_new, w) = shc_update(n, &decision.n, rng);
        return (RegulatorGains::projected(k, n_new.max(k)), w);
    }
    (*gains, None)
}

/// Buffers, configuration and the update rule bundled for use inside a
/// control loop.
#[derive(Debug, Clone)]
pub struct AssociatedSearch {
    cfg: AseConfig,
    buffers: AseBuffers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AseTrace {
    pub branch: AseBranch,
    pub omega: Option<f64>,
    pub xi: Option<f64>,
    pub draw: Option<f64>,
}

impl AssociatedSearch {
    pub fn new(cfg: AseConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(AssociatedSearch {
            buffers: AseBuffers::new(cfg.capacity),
            cfg,
        })
    }

    pub fn config(&self) -> &AseConfig {
        &self.cfg
    }

    pub fn buffers(&self) -> &AseBuffers {
        &self.buffers
    }

    /// Record one sample; once the window is full, evaluate it and apply any
    /// resulting update. Returns the trace of the evaluation, if one ran.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        r: f64,
        e: f64,
        gains: &RegulatorGains,
        rng: &mut R,
    ) -> Result<(RegulatorGains, Option<AseTrace>)> {
        self.buffers.push(r, e)?;
        if !self.buffers.is_full() {
            return Ok((*gains, None));
        }
        let decision = ase_evaluate(&mut self.buffers, gains, &self.cfg, rng)?;
        let (next, draw) = adapt_gains(gains, &decision, rng);
        Ok((
            next,
            Some(AseTrace {
                branch: decision.branch,
                omega: decision.omega,
                xi: decision.xi,
                draw,
            }),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg4() -> AseConfig {
        AseConfig {
            capacity: 4,
            ..AseConfig::default()
        }
    }

    fn gains(k: f64, n: f64) -> RegulatorGains {
        RegulatorGains::new(k, n).unwrap()
    }

    fn eval(r: &[f64], e: &[f64], g: RegulatorGains) -> (AseDecision, AseBuffers) {
        let mut b = AseBuffers::from_samples(r.len(), r, e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = AseConfig {
            capacity: r.len(),
            ..AseConfig::default()
        };
        let d = ase_evaluate(&mut b, &g, &cfg, &mut rng).unwrap();
        (d, b)
    }

    #[test]
    fn push_bookkeeping() {
        let mut b = AseBuffers::new(4);
        b.push(1.0, 0.1).unwrap();
        assert_eq!((b.references().len(), b.errors().len()), (1, 1));
        for _ in 0..3 {
            b.push(1.0, 0.1).unwrap();
        }
        assert!(b.is_full());
        assert!(matches!(b.push(1.0, 0.1), Err(Error::BufferFull(4))));
    }

    #[test]
    fn not_full_is_a_no_op() {
        let mut b = AseBuffers::from_samples(4, &[1.0, 1.0], &[0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = ase_evaluate(&mut b, &gains(1.0, 2.0), &cfg4(), &mut rng).unwrap();
        assert_eq!(d.branch, AseBranch::Filling);
        assert!(!d.is_eligible());
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn negative_reference_rejects() {
        let (d, b) = eval(&[0.5, -0.1, 0.7, 0.8], &[0.3, 0.2, 0.1, 0.05], gains(10.0, 60.0));
        assert_eq!(d.branch, AseBranch::NegativeReference);
        assert!(!d.is_eligible());
        assert_eq!(b.len(), 3);
        assert_eq!(b.references()[0], -0.1);
    }

    #[test]
    fn all_negative_errors_lower_n() {
        let (d, b) = eval(&[1.0; 4], &[-0.1, -0.2, -0.1, -0.3], gains(10.0, 60.0));
        assert_eq!(d.branch, AseBranch::AllErrorsNegative);
        assert_eq!(
            d.n,
            GainMove {
                eligible: true,
                direction: -1,
                step: 2.0
            }
        );
        assert!(!d.k.eligible);
        assert!(b.is_empty());
    }

    #[test]
    fn peaky_output_lowers_k() {
        let (d, b) = eval(&[0.5, 0.6, 0.7, 0.8], &[0.3, 0.2, 0.1, 0.05], gains(10.0, 60.0));
        // U = [27.5, 32, 37.5, 42.5]; 42.5 > 1.1 * 34.875
        assert_eq!(d.branch, AseBranch::OutputPeakRatio);
        assert_eq!(
            d.k,
            GainMove {
                eligible: true,
                direction: -1,
                step: 2.0
            }
        );
        assert!(b.is_empty());
    }

    #[test]
    fn clean_window_uses_priority() {
        let r = [0.5, 0.6, 0.7, 0.8];
        let e = [0.3, 0.2, 0.1, 0.05];
        // U = [8, 8, 8, 8.5]; 8.5 <= 1.1 * 8.125
        let g = gains(10.0, 20.0);
        let unit_rho = AseConfig { rho: 1.0, ..cfg4() };
        let mut b = AseBuffers::from_samples(4, &r, &e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = ase_evaluate(&mut b, &g, &unit_rho, &mut rng).unwrap();
        assert_eq!(d.branch, AseBranch::Priority);
        let om = d.omega.unwrap();
        assert!((om - 0.512_820_512_820_512_9).abs() < 1e-12);
        let xi = d.xi.unwrap();
        if om > unit_rho.rho * xi {
            assert_eq!(
                d.k,
                GainMove {
                    eligible: true,
                    direction: 1,
                    step: 5.0
                }
            );
        } else {
            assert_eq!(
                d.n,
                GainMove {
                    eligible: true,
                    direction: 1,
                    step: 10.0
                }
            );
        }

        // xi forced to 0 (K branch) and to ~1 (N branch)
        let mut zero = StepRng::new(0, 0);
        let mut b = AseBuffers::from_samples(4, &r, &e).unwrap();
        let d = ase_evaluate(&mut b, &g, &unit_rho, &mut zero).unwrap();
        assert!(d.k.eligible && d.k.direction == 1 && !d.n.eligible);
        let mut high = StepRng::new(u64::MAX, 0);
        let mut b = AseBuffers::from_samples(4, &r, &e).unwrap();
        let d = ase_evaluate(&mut b, &g, &unit_rho, &mut high).unwrap();
        assert!(d.n.eligible && d.n.direction == 1 && !d.k.eligible);
    }

    #[test]
    fn reject_branches() {
        let g = gains(10.0, 60.0);
        let (d, _) = eval(&[1.0, 0.9, 1.0, 1.0], &[0.5; 4], g);
        assert_eq!(d.branch, AseBranch::DescendingReference);
        let (d, _) = eval(&[0.0, 0.0, 1.0, 1.0], &[0.5; 4], g);
        assert_eq!(d.branch, AseBranch::LeadingZeroReference);
        let (d, _) = eval(&[1.0; 4], &[-10.0, 0.5, 0.5, 0.5], g);
        assert_eq!(d.branch, AseBranch::NonPositiveOutput);
        let (d, _) = eval(&[1.0; 4], &[-0.1, 0.5, 0.5, 0.5], g);
        assert_eq!(d.branch, AseBranch::LeadingErrorNotPositive);
        let (d, _) = eval(&[1.0; 4], &[0.5, 0.5, 0.005, 0.5], g);
        assert_eq!(d.branch, AseBranch::BelowThreshold);
        let (d, b) = eval(&[1.0; 4], &[0.5, 0.5, -0.1, 0.5], g);
        assert_eq!(d.branch, AseBranch::ErrorSignChange);
        assert!(b.is_empty());
    }

    #[test]
    fn constant_reference_is_ascending() {
        let (d, _) = eval(&[1.0; 4], &[0.5; 4], gains(1.0, 50.0));
        assert_eq!(d.branch, AseBranch::Priority);
    }

    #[test]
    fn odd_capacity_leading_half() {
        // first ceil(5/2) = 3 samples zero -> reject; only 2 zero -> pass step 5
        let (d, _) = eval(&[0.0, 0.0, 0.0, 1.0, 1.0], &[0.5; 5], gains(1.0, 2.0));
        assert_eq!(d.branch, AseBranch::LeadingZeroReference);
        let (d, _) = eval(&[0.0, 0.0, 1.0, 1.0, 1.0], &[0.5; 5], gains(1.0, 2.0));
        assert_ne!(d.branch, AseBranch::LeadingZeroReference);
    }

    #[test]
    fn zero_gains_can_start_learning() {
        let (d, _) = eval(&[1.0; 4], &[1.0; 4], RegulatorGains::zero());
        assert_eq!(d.branch, AseBranch::Priority);
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&[0.4; 6], OmegaVariant::MeanDiff).value, 0.0);
        assert_eq!(omega(&[0.4; 6], OmegaVariant::MaxDiff).value, 0.0);
        let v = omega(&[0.3, 0.2, 0.1, 0.05], OmegaVariant::MeanDiff).value;
        assert!((v - 0.5128205).abs() < 1e-6);
        let v = omega(&[1.0, 2.0], OmegaVariant::MeanDiff).value;
        assert!((v + 2.0 / 3.0).abs() < 1e-12);
        let v = omega(&[0.3, 0.2, 0.1, 0.05], OmegaVariant::MaxDiff).value;
        assert!((v - 0.05 / 0.1625).abs() < 1e-12);
        let z = omega(&[1.0, -1.0], OmegaVariant::MeanDiff);
        assert!(z.degenerate);
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn shc_update_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(shc_update(7.0, &GainMove::default(), &mut rng), (7.0, None));

        // StepRng(1 << 63) yields w = 0.5 from gen_range(0..1)
        let mut half = StepRng::new(1 << 63, 0);
        let (v, w) = shc_update(100.0, &GainMove::new(1, 5.0), &mut half);
        assert_eq!(w, Some(0.5));
        assert_eq!(v, 102.5);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        loop {
            let (v, w) = shc_update(1.0, &GainMove::new(-1, 5.0), &mut rng);
            if w.unwrap() > 0.2 {
                assert_eq!(v, 0.0);
                break;
            }
        }
    }

    #[test]
    fn adapt_gains_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = gains(10.0, 20.0);
        let none = AseDecision::none(AseBranch::BelowThreshold);
        assert_eq!(adapt_gains(&g, &none, &mut rng).0, g);

        let mut high = StepRng::new(u64::MAX, 0);
        let d = AseDecision::move_n(AseBranch::AllErrorsNegative, -1, 50.0);
        let (out, _) = adapt_gains(&g, &d, &mut high);
        assert_eq!(out.n(), out.k());
        assert_eq!(out.k(), 10.0);

        let d = AseDecision::move_k(AseBranch::Priority, 1, 5.0);
        let (out, _) = adapt_gains(&g, &d, &mut rng);
        assert_eq!(out.n(), 20.0);
        assert!(out.k() > 10.0 && out.k() < 15.0);
    }

    #[test]
    fn config_validation() {
        assert!(AseConfig::default().validate().is_ok());
        assert!(AseConfig {
            gamma: 1.0,
            ..AseConfig::default()
        }
        .validate()
        .is_err());
        assert!(AseConfig {
            capacity: 3,
            ..AseConfig::default()
        }
        .validate()
        .is_err());
        assert!(AseConfig {
            rho: 0.0,
            ..AseConfig::default()
        }
        .validate()
        .is_err());
        let mut c = AseConfig::default();
        c.steps[2] = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn non_finite_buffer_rejected() {
        let mut b = AseBuffers::from_samples(4, &[1.0; 4], &[0.5, f64::NAN, 0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(ase_evaluate(&mut b, &gains(1.0, 2.0), &cfg4(), &mut rng).is_err());
    }
}
