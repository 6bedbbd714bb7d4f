use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Evaluation requested at a point of the spectrum of the inner function.
    #[error("point {what} lies on the spectrum of the inner function")]
    OnSpectrum { what: String },

    /// A point has infinite or vanishing kernel norm.
    #[error("point id {id}: {reason}")]
    DegeneratePoint { id: u64, reason: String },

    /// A numerical procedure left its domain or failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A certificate that the caller required could not be produced.
    #[error("certification failed: {0}")]
    Certification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
