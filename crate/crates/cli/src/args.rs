//! Command-line flags and their merge onto a JSON session config.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use unireg::{
    AseConfig, DriftSchedule, Method, OmegaVariant, PlantParams, RegulatorGains, SearchInterval, SessionConfig,
    TrajectoryKind, TrajectorySpec,
};

#[derive(Debug, Parser)]
#[command(
    name = "unireg",
    version,
    about = "Simulate and tune regulators for passive unidirectional plants"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run episodes with fixed gains.
    Simulate {
        #[command(flatten)]
        session: SessionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tune the gains with one of the search methods.
    Tune {
        /// Tuning method; the config file's, else shc-ase.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[command(flatten)]
        session: SessionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write a reference trajectory as `k,t,r` CSV.
    Traj {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        trajectory: TrajectoryArgs,
        /// Samples to emit; one period by default.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        sample_period: Option<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run every method on the same scenario and tabulate the results.
    Compare {
        #[command(flatten)]
        session: SessionArgs,
        /// Summary table destination; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write each method's step log here as `<method>.csv`.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Also write each method's plot here as `<method>.svg`.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
        /// Run the methods one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gss,
    Gss2d,
    Shc,
    ShcAse,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gss => Method::Gss,
            MethodArg::Gss2d => Method::Gss2d,
            MethodArg::Shc => Method::Shc,
            MethodArg::ShcAse => Method::ShcAse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Rectangular,
    Versine,
    RandomSteps,
    RandomVersine,
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OmegaArg {
    MeanDiff,
    MaxDiff,
}

#[derive(Debug, Default, Args)]
pub struct OutputArgs {
    /// Step log CSV; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Plot of response, control output and gains.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Session summary as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct TrajectoryArgs {
    #[arg(long, value_enum)]
    pub trajectory: Option<KindArg>,
    /// Wave period, or segment length for the random kinds [s].
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Seed for random segment amplitudes.
    #[arg(long)]
    pub traj_seed: Option<u64>,
    /// Scale versines to peak at the amplitude.
    #[arg(long)]
    pub normalized: Option<bool>,
    /// Comma-separated samples for the arbitrary kind.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Default, Args)]
pub struct SessionArgs {
    /// JSON session config supplying defaults for every flag.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub f: Option<f64>,
    /// Controller step [s]; applies to plant and trajectory.
    #[arg(long)]
    pub sample_period: Option<f64>,
    /// Per-step ramp on `a`; enables drift.
    #[arg(long)]
    pub drift_a: Option<f64>,
    /// Per-step ramp on `b`; enables drift.
    #[arg(long)]
    pub drift_b: Option<f64>,

    #[command(flatten)]
    pub trajectory: TrajectoryArgs,

    /// Initial feedback gain.
    #[arg(long = "k0")]
    pub k: Option<f64>,
    /// Initial feedforward gain.
    #[arg(long = "n0")]
    pub n: Option<f64>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Steps per episode; one trajectory period by default.
    #[arg(long)]
    pub episode_len: Option<usize>,
    /// Effort weight in the episodic cost.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output limit checked in the summary.
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub abort_on_instability: Option<bool>,

    /// Five comma-separated ASE step sizes.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// ASE buffer length in samples.
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long, value_enum)]
    pub omega: Option<OmegaArg>,

    /// Neighbor step for hill climbing.
    #[arg(long)]
    pub shc_step: Option<f64>,
    /// Golden-section search range for K as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub k_range: Option<Vec<f64>>,
    /// Golden-section search range for N as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub n_range: Option<Vec<f64>>,
    /// Golden-section stopping width.
    #[arg(long)]
    pub search_tol: Option<f64>,
}

pub type ConfigResult<T> = Result<T, String>;

pub fn load_config(path: Option<&Path>) -> ConfigResult<SessionConfig> {
    let Some(path) = path else {
        return Ok(SessionConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
}

impl TrajectoryArgs {
    fn is_empty(&self) -> bool {
        self.trajectory.is_none()
            && self.period.is_none()
            && self.amplitude.is_none()
            && self.traj_seed.is_none()
            && self.normalized.is_none()
            && self.samples.is_none()
    }

    /// `base` with every given flag applied.
    pub fn apply(&self, base: &TrajectorySpec, sample_period: Option<f64>) -> ConfigResult<TrajectorySpec> {
        if self.is_empty() && sample_period.is_none() {
            return Ok(base.clone());
        }
        let kind = match (self.trajectory, &self.samples) {
            (Some(KindArg::Arbitrary) | None, Some(samples)) => TrajectoryKind::Arbitrary {
                samples: samples.clone(),
            },
            (Some(KindArg::Arbitrary), None) => match base.kind() {
                k @ TrajectoryKind::Arbitrary { .. } => k.clone(),
                _ => return Err("--trajectory arbitrary needs --samples".into()),
            },
            (Some(_), Some(_)) => return Err("--samples only applies to the arbitrary trajectory".into()),
            (Some(KindArg::Rectangular), None) => TrajectoryKind::Rectangular,
            (Some(KindArg::Versine), None) => TrajectoryKind::Versine,
            (Some(KindArg::RandomSteps), None) => TrajectoryKind::RandomSteps,
            (Some(KindArg::RandomVersine), None) => TrajectoryKind::RandomVersine,
            (None, None) => base.kind().clone(),
        };
        let t = sample_period.unwrap_or(base.sample_period());
        let period = match (&kind, self.period) {
            (_, Some(p)) => p,
            (TrajectoryKind::Arbitrary { samples }, None) => samples.len() as f64 * t,
            (_, None) => base.period(),
        };
        TrajectorySpec::new(kind, period, self.amplitude.unwrap_or(base.amplitude()), t)
            .map(|s| {
                s.with_seed(self.traj_seed.unwrap_or(base.seed()))
                    .normalized(self.normalized.unwrap_or(base.is_normalized()))
            })
            .map_err(|e| e.to_string())
    }
}

impl SessionArgs {
    /// Config file (or defaults) with the flags laid on top.
    pub fn resolve(&self, method: Option<Method>) -> ConfigResult<SessionConfig> {
        let mut cfg = load_config(self.config.as_deref())?;
        set(&mut cfg.method, method);

        let p = cfg.plant;
        cfg.plant = PlantParams::new(
            self.a.unwrap_or(p.a()),
            self.b.unwrap_or(p.b()),
            self.c.unwrap_or(p.c()),
            self.f.unwrap_or(p.f()),
            self.sample_period.unwrap_or(p.sample_period()),
        )
        .map_err(|e| e.to_string())?;
        if self.drift_a.is_some() || self.drift_b.is_some() {
            cfg.drift = DriftSchedule::ramp(
                self.drift_a.unwrap_or(cfg.drift.a_rate),
                self.drift_b.unwrap_or(cfg.drift.b_rate),
            );
        }
        cfg.trajectory = self.trajectory.apply(&cfg.trajectory, self.sample_period)?;

        if self.k.is_some() || self.n.is_some() {
            let g = cfg.initial_gains;
            cfg.initial_gains =
                RegulatorGains::new(self.k.unwrap_or(g.k()), self.n.unwrap_or(g.n())).map_err(|e| e.to_string())?;
        }
        set(&mut cfg.episodes, self.episodes);
        if self.episode_len.is_some() {
            cfg.episode_len = self.episode_len;
        }
        set(&mut cfg.alpha, self.alpha);
        set(&mut cfg.u_max, self.u_max);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.abort_on_instability, self.abort_on_instability);

        let ase: &mut AseConfig = &mut cfg.ase;
        if let Some(b) = &self.betas {
            ase.steps = b
                .as_slice()
                .try_into()
                .map_err(|_| format!("--betas takes 5 values, got {}", b.len()))?;
        }
        set(&mut ase.gamma, self.gamma);
        set(&mut ase.epsilon, self.epsilon);
        set(&mut ase.rho, self.rho);
        set(&mut ase.capacity, self.capacity);
        if let Some(o) = self.omega {
            ase.omega = match o {
                OmegaArg::MeanDiff => OmegaVariant::MeanDiff,
                OmegaArg::MaxDiff => OmegaVariant::MaxDiff,
            };
        }

        set(&mut cfg.shc.step, self.shc_step);
        let tol = self.search_tol;
        cfg.search.k = interval(cfg.search.k, self.k_range.as_deref(), tol)?;
        cfg.search.n = interval(cfg.search.n, self.n_range.as_deref(), tol)?;

        if cfg.episodes == 0 {
            return Err("--episodes must be >= 1".into());
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn interval(base: SearchInterval, range: Option<&[f64]>, tol: Option<f64>) -> ConfigResult<SearchInterval> {
    let (lo, hi) = match range {
        Some([lo, hi]) => (*lo, *hi),
        Some(other) => return Err(format!("a range takes `lo,hi`, got {} values", other.len())),
        None => (base.lower, base.upper),
    };
    SearchInterval::new(lo, hi, tol.unwrap_or(base.tolerance)).map_err(|e| e.to_string())
}
