use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file; `line` is 1-based and counts the header.
    #[error("{context}: {message} at line {line}")]
    Parse {
        context: String,
        line: u64,
        message: String,
    },

    /// Structural problem in a file that has no meaningful line number
    /// (missing sections, version mismatch).
    #[error("{0}")]
    Format(String),

    /// A precondition on the inputs does not hold.
    #[error("{0}")]
    InvalidInput(String),

    /// An iterative solver hit its iteration cap.
    #[error("solver did not converge: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn parse(context: impl Into<String>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            line,
            message: message.into(),
        }
    }
}
