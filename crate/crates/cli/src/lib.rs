//! Command line front end and HTTP service for `it2fgp`.

pub mod api;
pub mod commands;
pub mod input;
pub mod numfmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input.
    #[error("{0}")]
    BadInput(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
