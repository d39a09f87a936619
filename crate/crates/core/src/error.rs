use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::space::Violation;

/// Errors raised by the pure optimization layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The variable space failed validation.
    InvalidSpace(Vec<Violation>),
    /// A coordinate list did not match the space dimension.
    DimensionMismatch {
        /// Dimension of the space.
        expected: usize,
        /// Length that was supplied.
        actual: usize,
    },
    /// A solver or analysis configuration is not usable.
    InvalidConfig(String),
    /// A built-in problem name is not in the registry.
    UnknownProblem(String),
    /// A score table is not rectangular or is otherwise malformed.
    InvalidTable(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpace(violations) => {
                write!(f, "invalid variable space:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected} coordinates, got {actual}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::UnknownProblem(name) => write!(f, "unknown built-in problem {name:?}"),
            Error::InvalidTable(msg) => write!(f, "invalid score table: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
