use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is singular or not positive definite")]
    Singular,
    #[error("spectral radius estimate left the representable range")]
    RangeExceeded,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible mixing constraints: {0}")]
    InfeasibleConstraints(String),
    #[error("block subproblem did not converge: {0}")]
    SubproblemFailed(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("no stable step found above {0:e}")]
    NoStableStep(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}

#[allow(dead_code)]
pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
