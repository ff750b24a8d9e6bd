use thiserror::Error;

use crate::harness::StepRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative plant input {0} (plant is unidirectional)")]
    NegativeInput(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("drifted parameters left the passive region at step {step}: a = {a}, b = {b}")]
    DriftOutOfRange { step: u64, a: f64, b: f64 },

    #[error("ASE buffers are full ({0} samples); evaluate before pushing")]
    BufferFull(usize),

    #[error("{method} did not converge within {limit} iterations")]
    IterationLimit { method: &'static str, limit: usize },

    #[error("episode budget exhausted")]
    EpisodeBudget,

    #[error("closed loop diverged at step {}: x = {}", .last.k, .last.x)]
    Divergence { last: Box<StepRecord> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
