//! Command-line driver: configuration, orchestration and output files.

pub mod config;
pub mod output;
pub mod run;

use nehari::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl CliError {
    pub(crate) fn from_solver(e: SolverError) -> Self {
        CliError::Config(e.to_string())
    }
}
