//! Closed-loop episodes, episode costs and metrics, and tuning sessions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ase::{AseConfig, AseTrace, AssociatedSearch};
use crate::error::{Error, Result};
use crate::plant::{apply_drift, plant_step, DriftSchedule, PlantParams, PlantState};
use crate::regulator::{control_output, stability_check, RegulatorGains};
use crate::trajectory::TrajectorySpec;
use crate::tuners::{
    golden_section_1d, golden_section_2d, shc_online_step, CostOracle, HillClimbConfig, SearchInterval,
};

/// One control step. Gains are the ones used to compute `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub episode: usize,
    pub k: u64,
    pub t: f64,
    pub r: f64,
    pub x: f64,
    pub u: f64,
    pub e: f64,
    pub gain_k: f64,
    pub gain_n: f64,
    /// Set on steps where the associated search element evaluated its window.
    pub ase: Option<AseTrace>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub records: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn new(episode: usize) -> Self {
        EpisodeLog {
            episode,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|s| s.e)
    }

    pub fn inputs(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|s| s.u)
    }

    pub fn peak_input(&self) -> f64 {
        self.inputs().fold(0.0, f64::max)
    }

    /// Gains in effect at the last step, if any.
    pub fn final_gains(&self) -> Option<(f64, f64)> {
        self.records.last().map(|s| (s.gain_k, s.gain_n))
    }
}

/// Hook called after every step with the sample just taken; may replace
/// the gains used from the next step on.
pub trait GainAdapter {
    fn observe(&mut self, r: f64, e: f64, gains: &RegulatorGains) -> Result<(RegulatorGains, Option<AseTrace>)>;
}

/// Keeps the gains fixed.
pub struct NoAdaptation;

impl GainAdapter for NoAdaptation {
    fn observe(&mut self, _r: f64, _e: f64, gains: &RegulatorGains) -> Result<(RegulatorGains, Option<AseTrace>)> {
        Ok((*gains, None))
    }
}

/// Associated search element driven by its own seeded generator.
pub struct AseAdapter {
    search: AssociatedSearch,
    rng: ChaCha8Rng,
}

impl AseAdapter {
    pub fn new(cfg: AseConfig, seed: u64) -> Result<Self> {
        Ok(AseAdapter {
            search: AssociatedSearch::new(cfg)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl GainAdapter for AseAdapter {
    fn observe(&mut self, r: f64, e: f64, gains: &RegulatorGains) -> Result<(RegulatorGains, Option<AseTrace>)> {
        self.search.observe(r, e, gains, &mut self.rng)
    }
}

/// Plant, reference and the running step counter of one control loop.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    params: PlantParams,
    drift: DriftSchedule,
    trajectory: TrajectorySpec,
    state: PlantState,
    divergence_limit: f64,
    /// Steps whose gains fell outside the stable region.
    pub unstable_steps: usize,
    abort_on_instability: bool,
}

impl ClosedLoop {
    pub fn new(params: PlantParams, drift: DriftSchedule, trajectory: TrajectorySpec) -> Self {
        let divergence_limit = 1e6 * trajectory.peak();
        ClosedLoop {
            params,
            drift,
            trajectory,
            state: PlantState::at_rest(),
            divergence_limit,
            unstable_steps: 0,
            abort_on_instability: false,
        }
    }

    pub fn abort_on_instability(mut self, on: bool) -> Self {
        self.abort_on_instability = on;
        self
    }

    pub fn state(&self) -> PlantState {
        self.state
    }

    pub fn trajectory(&self) -> &TrajectorySpec {
        &self.trajectory
    }

    /// Run `length` steps, appending to `log` as it goes so that a divergence
    /// leaves the steps taken so far in place. Returns the gains in effect
    /// after the last step.
    pub fn run_into(
        &mut self,
        log: &mut EpisodeLog,
        mut gains: RegulatorGains,
        length: usize,
        adapter: &mut dyn GainAdapter,
    ) -> Result<RegulatorGains> {
        let period = self.params.sample_period();
        for _ in 0..length {
            let k = self.state.k;
            let params = apply_drift(&self.params, &self.drift, k)?;
            let verdict = stability_check(&params, &gains);
            if !verdict.contraction || gains.k() >= verdict.k_ceiling {
                self.unstable_steps += 1;
                if self.abort_on_instability {
                    return Err(Error::invalid(
                        "gains",
                        format!("K = {} is outside the stable region at step {k}", gains.k()),
                    ));
                }
            }
            let r = self.trajectory.sample(k);
            let x = self.state.x;
            let e = r - x;
            let u = control_output(&gains, e, r)?;
            let mut record = StepRecord {
                episode: log.episode,
                k,
                t: k as f64 * period,
                r,
                x,
                u,
                e,
                gain_k: gains.k(),
                gain_n: gains.n(),
                ase: None,
            };
            let next = match plant_step(&params, self.state, u) {
                Ok(next) if next.x.abs() <= self.divergence_limit => next,
                Ok(_) | Err(Error::NonFinite(_)) => {
                    log.records.push(record);
                    return Err(Error::Divergence { last: Box::new(record) });
                }
                Err(other) => return Err(other),
            };
            self.state = next;
            let (updated, trace) = adapter.observe(r, e, &gains)?;
            record.ase = trace;
            gains = updated;
            log.records.push(record);
        }
        Ok(gains)
    }
}

/// One episode from rest at step 0 with fixed gains.
pub fn run_episode(
    params: &PlantParams,
    gains: &RegulatorGains,
    trajectory: &TrajectorySpec,
    length: usize,
) -> Result<EpisodeLog> {
    let mut plant = ClosedLoop::new(*params, DriftSchedule::inactive(), trajectory.clone());
    let mut log = EpisodeLog::new(1);
    plant.run_into(&mut log, *gains, length, &mut NoAdaptation)?;
    Ok(log)
}

/// Sum of absolute regulating errors.
pub fn cost_j(log: &EpisodeLog) -> f64 {
    log.errors().map(f64::abs).sum()
}

/// Sum of absolute errors plus `alpha` times the control effort.
pub fn cost_jprime(log: &EpisodeLog, alpha: f64) -> f64 {
    log.records.iter().map(|s| s.e.abs() + alpha * s.u).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub peak_input: f64,
    /// `max u < u_limit`
    pub within_limit: bool,
    /// `max u / sum |u|`
    pub peak_ratio: f64,
    /// `peak_ratio < gamma / episode_length`
    pub ratio_ok: bool,
    /// Set when `sum |u| == 0` and the ratio check passed vacuously.
    pub idle: bool,
}

pub fn feasibility_check(log: &EpisodeLog, u_limit: f64, gamma: f64) -> FeasibilityVerdict {
    let peak = log.peak_input();
    let total: f64 = log.inputs().map(f64::abs).sum();
    let bound = gamma / log.len() as f64;
    let (ratio, ratio_ok, idle) = if total == 0.0 {
        (0.0, true, true)
    } else {
        let ratio = peak / total;
        (ratio, ratio < bound, false)
    };
    FeasibilityVerdict {
        peak_input: peak,
        within_limit: peak < u_limit,
        peak_ratio: ratio,
        ratio_ok,
        idle,
    }
}

/// When an episode counts as converged: mean `|e|` over the final
/// `tail_fraction` of the episode below `error_bound`, and the episode's
/// final gains within `gain_tolerance` of where the previous episode left
/// them. Excursions inside the episode do not count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRule {
    pub error_bound: f64,
    pub gain_tolerance: f64,
    pub tail_fraction: f64,
}

impl ConvergenceRule {
    pub fn from_ase(cfg: &AseConfig) -> Self {
        ConvergenceRule {
            error_bound: 2.0 * cfg.epsilon,
            gain_tolerance: cfg.k_up(),
            tail_fraction: 0.25,
        }
    }

    pub fn episode_converged(&self, previous: Option<&EpisodeLog>, log: &EpisodeLog) -> bool {
        let Some(first) = log.records.first() else {
            return false;
        };
        let tail_len = ((log.len() as f64 * self.tail_fraction).ceil() as usize).clamp(1, log.len());
        let tail = &log.records[log.len() - tail_len..];
        let tail_mae = tail.iter().map(|s| s.e.abs()).sum::<f64>() / tail_len as f64;

        let (k0, n0) = previous
            .and_then(EpisodeLog::final_gains)
            .unwrap_or((first.gain_k, first.gain_n));
        let (k1, n1) = log.final_gains().expect("nonempty log");
        let drift = (k1 - k0).abs().max((n1 - n0).abs());
        tail_mae < self.error_bound && drift < self.gain_tolerance
    }

    /// 1-based index of the first episode from which every later episode is
    /// converged.
    pub fn episodes_to_convergence(&self, logs: &[EpisodeLog]) -> Option<usize> {
        let mut first = None;
        for (i, log) in logs.iter().enumerate() {
            let prev = if i == 0 { None } else { Some(&logs[i - 1]) };
            if self.episode_converged(prev, log) {
                first.get_or_insert(i + 1);
            } else {
                first = None;
            }
        }
        first
    }
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        ConvergenceRule::from_ase(&AseConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub mean_abs_error: f64,
    pub rms_error: f64,
    pub max_input: f64,
    pub mean_input: f64,
    /// `None` when the session never settled.
    pub episodes_to_convergence: Option<usize>,
    pub steps: usize,
}

/// Error and effort metrics over every record of `logs`.
pub fn summarize_metrics(logs: &[EpisodeLog], rule: &ConvergenceRule) -> MetricsSummary {
    let steps: usize = logs.iter().map(EpisodeLog::len).sum();
    let n = steps.max(1) as f64;
    let records = || logs.iter().flat_map(|l| l.records.iter());
    MetricsSummary {
        mean_abs_error: records().map(|s| s.e.abs()).sum::<f64>() / n,
        rms_error: (records().map(|s| s.e * s.e).sum::<f64>() / n).sqrt(),
        max_input: records().map(|s| s.u).fold(0.0, f64::max),
        mean_input: records().map(|s| s.u).sum::<f64>() / n,
        episodes_to_convergence: rule.episodes_to_convergence(logs),
        steps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Constant gains.
    Fixed,
    /// 1-D golden-section search over N with K held at its initial value.
    Gss,
    /// Coordinate-alternating golden-section search over (K, N).
    Gss2d,
    /// Online stochastic hill climbing, one live episode per evaluation.
    Shc,
    /// Stochastic hill climbing gated by the associated search element.
    #[default]
    ShcAse,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Fixed, Method::Gss, Method::Gss2d, Method::Shc, Method::ShcAse];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Fixed => "fixed",
            Method::Gss => "gss",
            Method::Gss2d => "gss2d",
            Method::Shc => "shc",
            Method::ShcAse => "shc-ase",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

/// Search box for the golden-section tuners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSearch {
    pub k: SearchInterval,
    pub n: SearchInterval,
}

impl Default for GainSearch {
    fn default() -> Self {
        GainSearch {
            k: SearchInterval {
                lower: 0.0,
                upper: 600.0,
                tolerance: 1.0,
            },
            n: SearchInterval {
                lower: 0.0,
                upper: 600.0,
                tolerance: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub plant: PlantParams,
    pub drift: DriftSchedule,
    pub trajectory: TrajectorySpec,
    pub method: Method,
    pub initial_gains: RegulatorGains,
    pub episodes: usize,
    /// Steps per episode; one trajectory period when unset.
    pub episode_len: Option<usize>,
    /// Effort weight in the episode cost used by the episodic tuners.
    pub alpha: f64,
    /// Limit on the regulator output, reported per episode.
    pub u_max: f64,
    pub seed: u64,
    pub ase: AseConfig,
    pub shc: HillClimbConfig,
    pub search: GainSearch,
    pub abort_on_instability: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            plant: PlantParams::tcp_muscle(),
            drift: DriftSchedule::inactive(),
            trajectory: TrajectorySpec::rectangular(100.0, 1.0, 0.1).expect("valid default trajectory"),
            method: Method::ShcAse,
            initial_gains: RegulatorGains::zero(),
            episodes: 10,
            episode_len: None,
            alpha: 1e-3,
            u_max: 1000.0,
            seed: 0,
            ase: AseConfig::default(),
            shc: HillClimbConfig::new(10.0),
            search: GainSearch::default(),
            abort_on_instability: false,
        }
    }
}

impl SessionConfig {
    pub fn episode_length(&self) -> usize {
        self.episode_len.unwrap_or_else(|| self.trajectory.steps_per_period())
    }

    pub fn validate(&self) -> Result<()> {
        if self.episode_length() == 0 {
            return Err(Error::invalid("episode_len", "must be >= 1"));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid("alpha", "must be >= 0"));
        }
        if !(self.u_max.is_finite() && self.u_max > 0.0) {
            return Err(Error::invalid("u_max", "must be > 0"));
        }
        if (self.plant.sample_period() - self.trajectory.sample_period()).abs() > 1e-12 {
            return Err(Error::invalid(
                "sample_period",
                "plant and trajectory sampling periods differ",
            ));
        }
        self.ase.validate()?;
        self.shc.validate()?;
        for iv in [self.search.k, self.search.n] {
            SearchInterval::new(iv.lower, iv.upper, iv.tolerance)?;
        }
        Ok(())
    }

    pub fn rule(&self) -> ConvergenceRule {
        ConvergenceRule::from_ase(&self.ase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub method: Method,
    pub summary: MetricsSummary,
    #[serde(skip)]
    pub logs: Vec<EpisodeLog>,
    /// Oracle evaluations spent by the tuner (episodes on a plant replica for
    /// the golden-section methods, live episodes for hill climbing).
    pub evaluations: usize,
    pub final_gains: RegulatorGains,
    /// Per-episode `J`.
    pub episode_costs: Vec<f64>,
    pub unstable_steps: usize,
}

/// A session that stopped early, with every episode logged before the fault.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct SessionFailure {
    pub error: Error,
    pub logs: Vec<EpisodeLog>,
}

impl From<Error> for SessionFailure {
    fn from(error: Error) -> Self {
        SessionFailure {
            error,
            logs: Vec::new(),
        }
    }
}

pub fn run_adaptive_session(cfg: &SessionConfig) -> std::result::Result<SessionReport, SessionFailure> {
    cfg.validate()?;
    let mut session = Session::new(cfg);
    let outcome = match cfg.method {
        Method::Fixed => session.run_fixed(cfg.initial_gains),
        Method::Gss => session.run_gss(false),
        Method::Gss2d => session.run_gss(true),
        Method::Shc => session.run_shc(),
        Method::ShcAse => session.run_ase(),
    };
    match outcome {
        Ok(final_gains) => Ok(session.report(final_gains)),
        Err(error) => Err(SessionFailure {
            error,
            logs: session.logs,
        }),
    }
}

struct Session<'a> {
    cfg: &'a SessionConfig,
    plant: ClosedLoop,
    logs: Vec<EpisodeLog>,
    evaluations: usize,
}

impl<'a> Session<'a> {
    fn new(cfg: &'a SessionConfig) -> Self {
        Session {
            cfg,
            plant: new_loop(cfg),
            logs: Vec::new(),
            evaluations: 0,
        }
    }

    fn live_episode(&mut self, gains: RegulatorGains, adapter: &mut dyn GainAdapter) -> Result<RegulatorGains> {
        let mut log = EpisodeLog::new(self.logs.len() + 1);
        let result = self.plant.run_into(&mut log, gains, self.cfg.episode_length(), adapter);
        self.logs.push(log);
        result
    }

    fn run_fixed(&mut self, gains: RegulatorGains) -> Result<RegulatorGains> {
        for _ in 0..self.cfg.episodes {
            self.live_episode(gains, &mut NoAdaptation)?;
        }
        Ok(gains)
    }

    fn run_ase(&mut self) -> Result<RegulatorGains> {
        let mut adapter = AseAdapter::new(self.cfg.ase, self.cfg.seed)?;
        let mut gains = self.cfg.initial_gains;
        for _ in 0..self.cfg.episodes {
            gains = self.live_episode(gains, &mut adapter)?;
        }
        Ok(gains)
    }

    /// Golden-section search scored on a replica of the plant; the tuned
    /// gains then run on the live plant for every episode.
    fn run_gss(&mut self, two_dim: bool) -> Result<RegulatorGains> {
        let cfg = self.cfg;
        let length = cfg.episode_length();
        let replica = new_loop(cfg).abort_on_instability(false);
        let k0 = cfg.initial_gains.k();
        let mut oracle = CostOracle::new(|p: &[f64]| {
            let gains = if two_dim {
                RegulatorGains::projected(p[0], p[1])
            } else {
                RegulatorGains::projected(k0, p[0])
            };
            let mut plant = replica.clone();
            let mut log = EpisodeLog::new(0);
            plant.run_into(&mut log, gains, length, &mut NoAdaptation)?;
            Ok(cost_jprime(&log, cfg.alpha))
        });
        let gains = if two_dim {
            let out = golden_section_2d(&mut oracle, cfg.search.k, cfg.search.n)?;
            RegulatorGains::projected(out.point.0, out.point.1)
        } else {
            let n = SearchInterval {
                lower: cfg.search.n.lower.max(k0),
                upper: cfg.search.n.upper.max(k0 + cfg.search.n.tolerance),
                tolerance: cfg.search.n.tolerance,
            };
            let out = golden_section_1d(&mut oracle, n)?;
            RegulatorGains::projected(k0, out.point)
        };
        self.evaluations = oracle.evaluations();
        self.run_fixed(gains)
    }

    /// Online hill climbing where every evaluation is one live episode.
    fn run_shc(&mut self) -> Result<RegulatorGains> {
        let cfg = self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut current = vec![cfg.initial_gains.k(), cfg.initial_gains.n()];
        loop {
            let mut oracle = CostOracle::new(|p: &[f64]| {
                if self.logs.len() >= cfg.episodes {
                    return Err(Error::EpisodeBudget);
                }
                let gains = RegulatorGains::projected(p[0], p[1]);
                self.live_episode(gains, &mut NoAdaptation)?;
                let log = self.logs.last().expect("episode just logged");
                Ok(cost_jprime(log, cfg.alpha))
            });
            let step = shc_online_step(&mut oracle, &current, &cfg.shc, &mut rng);
            let spent = oracle.evaluations();
            match step {
                Ok(step) => {
                    self.evaluations += spent;
                    let g = RegulatorGains::projected(step.point[0], step.point[1]);
                    current = vec![g.k(), g.n()];
                }
                Err(Error::EpisodeBudget) => {
                    self.evaluations += spent - 1;
                    return Ok(RegulatorGains::projected(current[0], current[1]));
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn report(self, final_gains: RegulatorGains) -> SessionReport {
        SessionReport {
            method: self.cfg.method,
            summary: summarize_metrics(&self.logs, &self.cfg.rule()),
            episode_costs: self.logs.iter().map(cost_j).collect(),
            evaluations: self.evaluations,
            final_gains,
            unstable_steps: self.plant.unstable_steps,
            logs: self.logs,
        }
    }
}

fn new_loop(cfg: &SessionConfig) -> ClosedLoop {
    ClosedLoop::new(cfg.plant, cfg.drift, cfg.trajectory.clone()).abort_on_instability(cfg.abort_on_instability)
}
