use thiserror::Error;

/// Errors produced by the gap and bound pipelines.
#[derive(Debug, Error)]
pub enum GapError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not unitary (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed gate-set document: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = GapError> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GapError::InvalidArgument(msg.into()))
}
