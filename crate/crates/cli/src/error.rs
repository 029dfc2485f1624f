use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("solver failure: {0}")]
    Solver(#[from] mixbound::Error),

    #[error("malformed records: {0}")]
    Records(String),
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Records(_) => 2,
            CliError::Io { .. } | CliError::Solver(_) => 3,
        }
    }
}
