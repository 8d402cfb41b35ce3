//! Library side of the `crossing-kit` binary: config parsing, dispatch and
//! output writers.

pub mod config;
pub mod output;
pub mod run;

use std::fmt;

pub use config::{parse_config, Mode, RunConfig};
pub use run::{run, RunOutput};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    Config(String),
    /// A solver or quadrature failed on a valid problem.
    Numerical(String),
    /// Writing results failed.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Numerical(_) | CliError::Output(_) => exit::NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub mod exit {
    pub const PASS: i32 = 0;
    pub const VERDICT_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}
