use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A request that would exceed a hard size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Not enough observations in the requested window.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// An iterative solver stopped without meeting its tolerance.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        /// Best iterate reached before giving up.
        best: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }
}
