use thiserror::Error;

/// Errors raised by the library. The variant tells callers which kind of
/// contract was broken so the CLI can map it to an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inputs are individually valid but incompatible (measure tags, fields, dimensions).
    #[error("contract violation: {0}")]
    Contract(String),
    /// The request would exceed a configured size limit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A self-check failed; this points at a bug rather than bad input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    /// Malformed serialized input.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
