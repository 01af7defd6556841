use thiserror::Error;

/// Failure modes shared across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("chart exit: {0}")]
    ChartExit(String),
    #[error("coverage failure: {reason}; witness {witness}")]
    CoverageFailure { reason: String, witness: String },
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("constraint {name} failed: {detail}")]
    ConstraintFailure { name: String, detail: String },
    #[error("sample failure: {0}")]
    SampleFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn coverage(reason: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::CoverageFailure { reason: reason.into(), witness: witness.into() }
    }

    pub fn constraint(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::ConstraintFailure { name: name.into(), detail: detail.into() }
    }
}
