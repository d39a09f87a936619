use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors of the IO layer and the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: cache fingerprint {found} does not match the active space ({expected})", path.display())]
    Fingerprint {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("evaluator program not found: {0}")]
    EvaluatorMissing(String),

    #[error(transparent)]
    Core(#[from] bbhpo_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code: 3 for a missing evaluator program, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::EvaluatorMissing(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
