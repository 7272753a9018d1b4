use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and its front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("squeezing parameter lambda = {0} is at or beyond the infinite-squeezing singularity")]
    SqueezingSingularity(f64),

    #[error("negative squeezing in dB: {0}")]
    NegativeDecibels(f64),

    #[error("target g2(0) = {0} must lie strictly inside (0, 2)")]
    TargetOutOfRange(f64),

    #[error("Rabi frequency is zero: the input carries no photon flux")]
    NoInputFlux,

    #[error("grid is empty")]
    EmptyGrid,

    #[error("delay grid must start at 0 and be strictly increasing")]
    BadDelayGrid,

    #[error("time step {dt} exceeds the stability bound {dt_max}")]
    UnstableStep { dt: f64, dt_max: f64 },

    #[error("simulation needs at least one trajectory")]
    NoTrajectories,

    #[error("insufficient duration: {duration} < required {required} ({what})")]
    InsufficientDuration {
        duration: f64,
        required: f64,
        what: &'static str,
    },

    #[error("estimator sets have incompatible layouts and cannot be merged")]
    IncompatibleEstimators,

    #[error("Monte Carlo wall-clock budget of {0:.1} s exceeded")]
    BudgetExceeded(f64),

    #[error("refusing `{quantity}`: {reason}")]
    NonGaussianQuantity { quantity: String, reason: &'static str },

    #[error("configuration errors:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::BudgetExceeded(_) => 1,
            _ => 2,
        }
    }
}
