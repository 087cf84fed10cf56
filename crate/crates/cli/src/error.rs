use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or unknown configuration input.
    #[error("config error: {0}")]
    Schema(String),

    /// A value that parsed but is rejected by the library.
    #[error(transparent)]
    Core(#[from] vqa_core::Error),

    /// One or more verification checks failed.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for rejected values and failed checks, 2 for I/O and schema errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Schema(_) => 2,
            CliError::Core(_) | CliError::Failed(_) => 1,
        }
    }
}
