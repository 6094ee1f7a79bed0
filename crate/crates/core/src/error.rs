use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("points belong to different spaces: {0} vs {1}")]
    SpaceMismatch(String, String),
    #[error("kernel is infinite on the diagonal")]
    Diagonal,
    #[error("quadrature did not converge: estimate {value}, achieved error {achieved:e}, requested {requested:e}")]
    NoConvergence {
        value: f64,
        achieved: f64,
        requested: f64,
    },
    #[error("test function rejected: {0}")]
    Uncertified(String),
    #[error("matrix is not positive semidefinite: minimum eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
