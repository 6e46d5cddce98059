use thiserror::Error;

/// Errors produced by the analysis, decomposition and rounding routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed argument: dimension mismatch, out-of-range index, bad parameter.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The input is well formed but degenerate for the requested operation
    /// (for example a constant polynomial where a positive variance is needed).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The request exceeds a configured resource limit (enumeration size,
    /// pair budget, numeric range).
    #[error("resource limit: {0}")]
    Resource(String),

    /// A document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A verification that must hold by construction did not. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
