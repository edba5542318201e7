use thiserror::Error;

/// Errors shared across the optimizer, linear-algebra kernels, and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("singular system: condition estimate {cond:.3e} exceeds limit")]
    SingularSystem { cond: f64 },

    /// The generalized-eigenvalue metric (SᵀS) failed its positive-definiteness check.
    #[error("ill-conditioned metric: {0}")]
    IllConditionedMetric(String),

    /// The compact-form middle matrix is numerically singular even after retries.
    #[error("singular quasi-Newton memory: {0}")]
    SingularMemory(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }
}
