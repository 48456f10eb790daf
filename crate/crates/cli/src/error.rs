use std::path::PathBuf;

use embodykit_core::Error as CoreError;

/// Harness failures, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error at {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidInput(m) | CoreError::DegenerateTarget(m) | CoreError::Config(m) => CliError::Config(m),
            CoreError::Numerical(m) => CliError::Numerical(m),
            CoreError::Io { path, source } => CliError::io(path, source),
            CoreError::Format { path, message } => CliError::Io { path, message },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
