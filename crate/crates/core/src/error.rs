use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReproError {
    #[error("parameter point does not match the schema: {0}")]
    InvalidParameter(String),
    #[error("auxiliary draw has the wrong length or distribution: {0}")]
    InvalidAuxiliary(String),
    #[error("model is implicit; use the residual equation instead of generate")]
    ImplicitModel,
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),
    #[error("degenerate covariance in depth computation")]
    DegenerateCovariance,
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid membership: {0}")]
    InvalidMembership(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no root found: {0}")]
    NoRoot(String),
}

pub type Result<T> = std::result::Result<T, ReproError>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(ReproError::InvalidAlpha(alpha))
    }
}
