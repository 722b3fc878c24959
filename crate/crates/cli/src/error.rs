use std::path::PathBuf;

use sensekit::SenseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Sense(#[from] SenseError),
}

impl CliError {
    /// 2 for configuration problems, 3 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Sense(SenseError::Io(_) | SenseError::Csv(_)) => 3,
            CliError::Sense(_) => 2,
        }
    }
}
