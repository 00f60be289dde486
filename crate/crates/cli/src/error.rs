use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Success = 0,
    /// Numerical failure inside the optimizer or evaluator.
    Failure = 1,
    MaxIterations = 2,
    Config = 3,
    Io = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; the message names the offending key.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    /// Unreadable, corrupted or mismatched field file.
    #[error("field file {path}: {message}")]
    FieldFile { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] slc_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::Config,
            CliError::Io { .. } | CliError::FieldFile { .. } => ExitCode::Io,
            CliError::Core(slc_core::Error::InvalidInput(_) | slc_core::Error::DimensionMismatch { .. }) => ExitCode::Config,
            CliError::Core(slc_core::Error::Numerical(_)) => ExitCode::Failure,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
