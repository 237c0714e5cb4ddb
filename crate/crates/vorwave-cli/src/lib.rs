//! Library backing the `vorwave` command-line tool: configuration
//! ingestion, physical-unit scaling, deterministic report emission
//! and the subcommand pipelines.

pub mod commands;
pub mod config;
pub mod report;
pub mod scaling;

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(vorwave::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<vorwave::Error> for CliError {
    fn from(e: vorwave::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// Exit code policy: 2 configuration, 4 classification mismatch,
    /// 3 any other numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(vorwave::Error::Config { .. }) => 2,
            CliError::Core(vorwave::Error::Classification(_))
            | CliError::Core(vorwave::Error::EigenvalueCensus(_)) => 4,
            CliError::Core(_) => 3,
        }
    }
}
