use crate::model::Violation;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("plan violates its invariants: {0:?}")]
    InvalidPlan(Vec<Violation>),
    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),
    #[error("zero Fourier mode is {0}, expected 0")]
    NonzeroZeroMode(f64),
    #[error("table would hold {0} entries")]
    TableTooLarge(u128),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
