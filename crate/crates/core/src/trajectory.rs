//! Reference signals: rectangular pulse train, versine, random steps,
//! random-amplitude versine and an arbitrary sample list.
//!
//! Every kind is a pure function of the spec and the step index. Random
//! segment amplitudes are derived from `(seed, segment)` alone, so any
//! sample can be computed without replaying the ones before it.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Rectangular,
    Versine,
    RandomSteps,
    RandomVersine,
    Arbitrary { samples: Vec<f64> },
}

impl TrajectoryKind {
    pub fn name(&self) -> &'static str {
        match self {
            TrajectoryKind::Rectangular => "rectangular",
            TrajectoryKind::Versine => "versine",
            TrajectoryKind::RandomSteps => "random-steps",
            TrajectoryKind::RandomVersine => "random-versine",
            TrajectoryKind::Arbitrary { .. } => "arbitrary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTrajectory", into = "RawTrajectory")]
pub struct TrajectorySpec {
    kind: TrajectoryKind,
    period: f64,
    amplitude: f64,
    sample_period: f64,
    seed: u64,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct RawTrajectory {
    #[serde(flatten)]
    kind: TrajectoryKind,
    period: f64,
    #[serde(default = "unit")]
    amplitude: f64,
    #[serde(default = "tenth")]
    sample_period: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    normalized: bool,
}

fn unit() -> f64 {
    1.0
}

fn tenth() -> f64 {
    0.1
}

impl TryFrom<RawTrajectory> for TrajectorySpec {
    type Error = Error;

    fn try_from(raw: RawTrajectory) -> Result<Self> {
        Ok(
            TrajectorySpec::new(raw.kind, raw.period, raw.amplitude, raw.sample_period)?
                .with_seed(raw.seed)
                .normalized(raw.normalized),
        )
    }
}

impl From<TrajectorySpec> for RawTrajectory {
    fn from(s: TrajectorySpec) -> Self {
        RawTrajectory {
            kind: s.kind,
            period: s.period,
            amplitude: s.amplitude,
            sample_period: s.sample_period,
            seed: s.seed,
            normalized: s.normalized,
        }
    }
}

impl TrajectorySpec {
    /// `period` is the wave period (or segment length for the random kinds),
    /// in seconds; `sample_period` is the controller step.
    pub fn new(kind: TrajectoryKind, period: f64, amplitude: f64, sample_period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid("period", format!("must be > 0, got {period}")));
        }
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(Error::invalid(
                "sample_period",
                format!("must be > 0, got {sample_period}"),
            ));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::invalid("amplitude", format!("must be >= 0, got {amplitude}")));
        }
        if let TrajectoryKind::Arbitrary { samples } = &kind {
            if samples.is_empty() {
                return Err(Error::invalid(
                    "samples",
                    "arbitrary trajectory needs at least one sample",
                ));
            }
            if samples.iter().any(|s| !s.is_finite()) {
                return Err(Error::invalid("samples", "all samples must be finite"));
            }
        }
        Ok(TrajectorySpec {
            kind,
            period,
            amplitude,
            sample_period,
            seed: 0,
            normalized: false,
        })
    }

    pub fn rectangular(period: f64, amplitude: f64, sample_period: f64) -> Result<Self> {
        Self::new(TrajectoryKind::Rectangular, period, amplitude, sample_period)
    }

    pub fn versine(period: f64, amplitude: f64, sample_period: f64) -> Result<Self> {
        Self::new(TrajectoryKind::Versine, period, amplitude, sample_period)
    }

    pub fn random_steps(segment: f64, amplitude: f64, sample_period: f64, seed: u64) -> Result<Self> {
        Ok(Self::new(TrajectoryKind::RandomSteps, segment, amplitude, sample_period)?.with_seed(seed))
    }

    pub fn random_versine(segment: f64, amplitude: f64, sample_period: f64, seed: u64) -> Result<Self> {
        Ok(Self::new(TrajectoryKind::RandomVersine, segment, amplitude, sample_period)?.with_seed(seed))
    }

    /// `period` only sets the default episode length for this kind.
    pub fn arbitrary(samples: Vec<f64>, sample_period: f64) -> Result<Self> {
        let period = samples.len() as f64 * sample_period;
        Self::new(TrajectoryKind::Arbitrary { samples }, period, 1.0, sample_period)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Scale versines to peak at `amplitude` instead of `2 * amplitude`.
    pub fn normalized(mut self, on: bool) -> Self {
        self.normalized = on;
        self
    }

    pub fn kind(&self) -> &TrajectoryKind {
        &self.kind
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Steps in one period, rounded to the nearest whole step (at least 1).
    pub fn steps_per_period(&self) -> usize {
        match &self.kind {
            TrajectoryKind::Arbitrary { samples } => samples.len(),
            _ => ((self.period / self.sample_period).round() as usize).max(1),
        }
    }

    /// Upper bound on `|r(k)|` over all `k`.
    pub fn peak(&self) -> f64 {
        let versine_peak = if self.normalized { 1.0 } else { 2.0 };
        match &self.kind {
            TrajectoryKind::Rectangular | TrajectoryKind::RandomSteps => self.amplitude,
            TrajectoryKind::Versine | TrajectoryKind::RandomVersine => versine_peak * self.amplitude,
            TrajectoryKind::Arbitrary { samples } => samples.iter().fold(0.0, |m, s| m.max(s.abs())),
        }
    }

    pub fn sample(&self, k: u64) -> f64 {
        match &self.kind {
            TrajectoryKind::Rectangular => rectangular(self, k),
            TrajectoryKind::Versine => versine(self, k),
            TrajectoryKind::RandomSteps => random_steps(self, k),
            TrajectoryKind::RandomVersine => random_versine(self, k),
            TrajectoryKind::Arbitrary { .. } => arbitrary(self, k),
        }
    }

    pub fn samples(&self, range: std::ops::Range<u64>) -> Vec<f64> {
        range.map(|k| self.sample(k)).collect()
    }

    /// `(cycle index, fractional phase in [0, 1))` of step `k`.
    ///
    /// When the period is a whole number of steps the phase is computed with
    /// integer arithmetic, so periodic kinds repeat bit-for-bit.
    fn phase(&self, k: u64) -> (u64, f64) {
        let steps = self.period / self.sample_period;
        let whole = steps.round();
        if whole >= 1.0 && (steps - whole).abs() <= 1e-9 * whole {
            let p = whole as u64;
            (k / p, (k % p) as f64 / whole)
        } else {
            let cycles = k as f64 / steps;
            let n = cycles.floor();
            (n as u64, cycles - n)
        }
    }

    fn versine_at(&self, phase: f64) -> f64 {
        let raw = 1.0 - (TAU * phase).cos();
        if self.normalized {
            raw / 2.0
        } else {
            raw
        }
    }

    /// Amplitude of segment `n`, uniform on `[0, amplitude]`.
    pub fn segment_amplitude(&self, segment: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(segment);
        rng.gen_range(0.0..=self.amplitude)
    }
}

/// `amplitude * H(sin(2 pi T k / tau))` with `H(0) = 0`.
pub fn rectangular(spec: &TrajectorySpec, k: u64) -> f64 {
    let (_, phase) = spec.phase(k);
    // sin(2 pi q) > 0 exactly when 0 < q < 1/2
    if phase > 0.0 && phase < 0.5 {
        spec.amplitude
    } else {
        0.0
    }
}

pub fn versine(spec: &TrajectorySpec, k: u64) -> f64 {
    let (_, phase) = spec.phase(k);
    spec.amplitude * spec.versine_at(phase)
}

/// Piecewise-constant reference; segment `n` covers steps
/// `[n tau / T, (n + 1) tau / T)` and holds `rho_n`.
pub fn random_steps(spec: &TrajectorySpec, k: u64) -> f64 {
    let (segment, _) = spec.phase(k);
    spec.segment_amplitude(segment)
}

pub fn random_versine(spec: &TrajectorySpec, k: u64) -> f64 {
    let (segment, phase) = spec.phase(k);
    spec.segment_amplitude(segment) * spec.versine_at(phase)
}

/// Sample list lookup, holding the final value past the end.
pub fn arbitrary(spec: &TrajectorySpec, k: u64) -> f64 {
    match &spec.kind {
        TrajectoryKind::Arbitrary { samples } => {
            let i = (k as usize).min(samples.len() - 1);
            samples[i]
        }
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangular_examples() {
        let s = TrajectorySpec::rectangular(100.0, 1.0, 0.1).unwrap();
        assert_eq!(s.sample(250), 1.0);
        assert_eq!(s.sample(750), 0.0);
        assert_eq!(s.sample(0), 0.0);
        assert_eq!(s.sample(500), 0.0);
        assert_eq!(s.sample(1), 1.0);
        assert_eq!(s.sample(499), 1.0);
        assert_eq!(s.sample(1000), 0.0);
    }

    #[test]
    fn versine_examples() {
        let s = TrajectorySpec::versine(200.0, 1.0, 0.1).unwrap();
        assert_eq!(s.sample(0), 0.0);
        assert_eq!(s.sample(1000), 2.0);
        assert!((s.sample(500) - 1.0).abs() < 1e-12);
        let n = s.clone().normalized(true);
        assert_eq!(n.sample(1000), 1.0);
        assert_eq!(n.peak(), 1.0);
    }

    #[test]
    fn random_steps_segments() {
        let s = TrajectorySpec::random_steps(50.0, 2.0, 0.1, 11).unwrap();
        assert_eq!(s.sample(10), s.sample(11));
        assert_eq!(s.sample(0), s.segment_amplitude(0));
        // boundary at k = 500 switches to rho_1 on that very step
        assert_eq!(s.sample(499), s.segment_amplitude(0));
        assert_eq!(s.sample(500), s.segment_amplitude(1));
        assert_ne!(s.segment_amplitude(0), s.segment_amplitude(1));
    }

    #[test]
    fn random_steps_bounded_scan() {
        let s = TrajectorySpec::random_steps(0.3, 1.5, 0.1, 3).unwrap();
        for k in 0..100_000 {
            let r = s.sample(k);
            assert!((0.0..=1.5).contains(&r), "r({k}) = {r}");
        }
    }

    #[test]
    fn random_versine_shape() {
        let s = TrajectorySpec::random_versine(200.0, 1.0, 0.1, 5).unwrap();
        for n in 0..5u64 {
            assert_eq!(s.sample(n * 2000), 0.0);
            let mid = s.sample(n * 2000 + 1000);
            assert!((mid - 2.0 * s.segment_amplitude(n)).abs() < 1e-15);
        }
        let again = TrajectorySpec::random_versine(200.0, 1.0, 0.1, 5).unwrap();
        assert_eq!(s.samples(0..10_000), again.samples(0..10_000));
    }

    #[test]
    fn arbitrary_examples() {
        let s = TrajectorySpec::arbitrary(vec![0.1, 0.2], 0.1).unwrap();
        assert_eq!(s.sample(0), 0.1);
        assert_eq!(s.sample(5), 0.2);
        assert!(TrajectorySpec::arbitrary(vec![], 0.1).is_err());
        assert!(TrajectorySpec::arbitrary(vec![f64::NAN], 0.1).is_err());
        let neg = TrajectorySpec::arbitrary(vec![0.5, -0.5], 0.1).unwrap();
        assert_eq!(neg.sample(1), -0.5);
        assert_eq!(neg.peak(), 0.5);
    }

    #[test]
    fn invalid_specs() {
        assert!(TrajectorySpec::rectangular(0.0, 1.0, 0.1).is_err());
        assert!(TrajectorySpec::rectangular(1.0, -1.0, 0.1).is_err());
        assert!(TrajectorySpec::rectangular(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn non_integer_period_still_cycles() {
        let s = TrajectorySpec::rectangular(1.05, 1.0, 0.1).unwrap();
        let on: usize = (0..10_500).map(|k| s.sample(k) as usize).sum();
        // 10 of every 21 samples are on
        assert_eq!(on, 5_000);
    }
}
