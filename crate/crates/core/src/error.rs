use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps these onto exit codes, so the variants are grouped by how a
/// caller should react rather than by the module that raised them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical constraint (isometry, unitarity, normalisation) failed.
    #[error("validation failed: {what} (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    Validation {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    /// The numerics could not decide the question at the configured tolerances.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("resource bound exceeded: {0}")]
    Resource(String),

    /// The randomised sub-module search gave up without a certificate.
    #[error("decomposition unresolved: {0}")]
    Unresolved(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(position: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: msg.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
