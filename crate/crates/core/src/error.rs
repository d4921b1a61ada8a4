use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input with a known line number (1-based).
    #[error("{format}: {msg} at line {line}")]
    Parse {
        format: &'static str,
        line: usize,
        msg: String,
    },

    /// Malformed input that cannot be pinned to a line.
    #[error("{format}: {msg}")]
    Format { format: &'static str, msg: String },

    /// A well-formed value that violates an operation's precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// An internal invariant did not hold.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(format: &'static str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            format,
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn format(format: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            format,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
