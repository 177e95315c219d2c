use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, WorkbenchError>;

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: malformed file at byte offset {offset}: {reason}", path.display())]
    Format { path: PathBuf, offset: usize, reason: String },
    #[error("{}: not a {expected} file", path.display())]
    WrongFormat { path: PathBuf, expected: &'static str },
    #[error(transparent)]
    Core(#[from] rrwb_core::Error),
}

impl WorkbenchError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// 2 for configuration problems, 3 for I/O and file-format problems,
    /// 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use rrwb_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } | Self::Format { .. } | Self::WrongFormat { .. } => 3,
            Self::Core(E::InvalidConfig(_) | E::InvalidShape(_)) => 2,
            Self::Core(_) => 4,
        }
    }
}

macro_rules! config_error {
    ($($arg:tt)*) => {
        $crate::error::WorkbenchError::Config(format!($($arg)*))
    };
}
pub(crate) use config_error;
