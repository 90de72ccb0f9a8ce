use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading data or running an analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input: malformed rows, out-of-range parameters, failed preconditions.
    #[error("{0}")]
    Input(String),

    /// A malformed record in an input file, with its 1-based line number.
    #[error("{path}:{line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A linear system could not be solved.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by the caller's data or arguments rather than
    /// by a failed computation.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Row { .. } | Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
