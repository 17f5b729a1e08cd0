use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown quantity kind `{0}` (expected length, energy or time)")]
    UnknownKind(String),

    #[error("time {t} outside schedule range [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("state tracking lost at level {level}: overlap {overlap:.3e} below {threshold:.3e}")]
    TrackingLost {
        level: usize,
        overlap: f64,
        threshold: f64,
    },

    #[error("linear solve failed at step {step}: {reason}")]
    LinearSolve { step: usize, reason: String },

    #[error("scattering length diverges at B = B0 = {0} G")]
    ResonancePole(f64),

    #[error("unphysical coupling: a_bg * delta_n = {0} must be non-negative")]
    UnphysicalCoupling(f64),

    #[error("matrix exponential failed for segment {0}")]
    Exponential(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
