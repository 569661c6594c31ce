use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the range its container can represent.
    #[error("range error: {0}")]
    Range(String),

    /// Invalid combination of arguments (bad base, mismatched lengths, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// The requested object would exceed a configured size budget.
    #[error("resource error: {0}")]
    Resource(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An internal invariant failed. Always a bug.
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
