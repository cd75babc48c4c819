//! Library side of the `cauchy-chain` binary: configuration, commands and the verification suite.

pub mod commands;
pub mod config;
pub mod suite;

use cauchy_chain::NumError;

pub use config::{ConfigError, GridSpec, RunConfig};

/// Exit codes of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const INVALID_CONFIG: i32 = 2;
    pub const NUMERICAL_ALARM: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical alarm: {0}")]
    Numerical(#[from] NumError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::INVALID_CONFIG,
            CliError::Numerical(_) => exit::NUMERICAL_ALARM,
            CliError::Io(_) | CliError::Csv(_) => exit::INVALID_CONFIG,
        }
    }
}
