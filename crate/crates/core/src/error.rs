use thiserror::Error;

/// Errors raised by the inference, scheduling and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("proposal density is zero at sampled parameter {0:?}")]
    ZeroProposalDensity(Vec<f64>),

    #[error("degenerate sample: weights sum to zero")]
    DegenerateSample,

    #[error("singular covariance among synthetic likelihood replicates")]
    SingularCovariance,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("estimate undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
