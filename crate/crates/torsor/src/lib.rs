//! Command-line front end, run configuration and certificate files for `torsor-core`.

pub mod certio;
pub mod cli;
pub mod config;

use torsor_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("config line {line}, field {field}: {msg}")]
    Config { line: usize, field: String, msg: String },
    #[error("cannot parse certificate: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 input, 3 search exhausted, 4 internal inconsistency.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NotFound { .. }) => 3,
            CliError::Core(Error::Inconsistent(_)) => 4,
            _ => 2,
        }
    }
}
