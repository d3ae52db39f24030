use std::path::{Path, PathBuf};

use deepmap_core::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    Argument(String),
    Refusal(String),
    Missing(PathBuf),
    Verification(String),
    Core(Error),
    Other(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Argument(_) | CliError::Core(Error::Argument(_)) => 2,
            CliError::Refusal(_) => 3,
            CliError::Missing(_) => 4,
            CliError::Core(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => 4,
            CliError::Verification(_) => 5,
            CliError::Core(_) | CliError::Other(_) => 1,
        }
    }

    pub fn from_io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing(path.to_path_buf())
        } else {
            CliError::Other(format!("{}: {e}", path.display()))
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Argument(m) => write!(f, "invalid argument: {m}"),
            CliError::Refusal(m) => write!(f, "refusing to overwrite {m} (use --force)"),
            CliError::Missing(p) => write!(f, "missing input: {}", p.display()),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
