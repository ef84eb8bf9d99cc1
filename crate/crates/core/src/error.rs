use std::path::{Path, PathBuf};

use crate::calibration::CalibrationError;
use crate::profile::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image format: {0}")]
    Format(String),
    /// Malformed replay or command file.
    #[error("{0}")]
    Input(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// Process exit code for the command-line front end: 2 for bad user
    /// input, 3 for environment failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
