use std::path::PathBuf;

use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs whose shapes or references do not line up (missing branches,
    /// out-of-range indices, tensor dimension mismatches).
    #[error("structural error: {0}")]
    Structural(String),

    /// Inputs that are well formed but violate a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A configured size or work limit was exceeded.
    #[error("capacity exceeded: {what} ({count} > {limit})")]
    Capacity {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    /// A statistic that is not defined for the given input.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: u64,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Capacity { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
