//! Command implementations behind the `asmc-sim` binary.

pub mod commands;
pub mod scenario;
pub mod svg;

use thiserror::Error;

/// Command failure, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<asmc_core::SimError> for CliError {
    fn from(e: asmc_core::SimError) -> Self {
        match e {
            asmc_core::SimError::InvalidConfig { .. } => CliError::Config(e.to_string()),
            _ => CliError::Diverged(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
