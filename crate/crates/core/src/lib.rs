//! Simulation and online tuning of clamped state-feedback regulators for
//! first-order passive unidirectional plants.
//!
//! The plant only accepts nonnegative inputs and relaxes on its own when the
//! input is zero. The regulator `u = K e + (N - K) r` (zero for `e <= 0`) is
//! tuned either by golden-section search, plain stochastic hill climbing, or
//! stochastic hill climbing gated by an associated search element that
//! inspects a sliding window of recent references and errors.

pub mod ase;
pub mod error;
pub mod harness;
pub mod plant;
pub mod regulator;
pub mod report;
pub mod trajectory;
pub mod tuners;

pub use ase::{
    adapt_gains, ase_evaluate, omega, shc_update, AseBranch, AseBuffers, AseConfig, AseDecision, AseTrace,
    AssociatedSearch, GainMove, OmegaVariant,
};
pub use error::{Error, Result};
pub use harness::{
    cost_j, cost_jprime, feasibility_check, run_adaptive_session, run_episode, summarize_metrics, AseAdapter,
    ClosedLoop, ConvergenceRule, EpisodeLog, FeasibilityVerdict, GainAdapter, GainSearch, Method, MetricsSummary,
    NoAdaptation, SessionConfig, SessionFailure, SessionReport, StepRecord,
};
pub use plant::{apply_drift, plant_output, plant_step, DriftSchedule, PlantParams, PlantState};
pub use regulator::{
    bounds_from_uncertainty, control_output, feedforward_offset, stability_check, GainBounds, Interval, RegulatorGains,
    StabilityVerdict,
};
pub use trajectory::{TrajectoryKind, TrajectorySpec};
pub use tuners::{
    golden_section_1d, golden_section_2d, oracle, shc_neighbors, shc_offline, shc_online_step, CostOracle,
    GoldenSection, GoldenSection2d, HillClimbConfig, HillClimbStep, SearchInterval, StepDistribution, PHI,
};
