use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A mandatory input file is missing or malformed.
    #[error("format error in {file}: {message}")]
    Format { file: PathBuf, message: String },

    /// Input parsed, but its contents contradict each other.
    #[error("integrity error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Integrity { line: Option<usize>, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity {
            line: None,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
