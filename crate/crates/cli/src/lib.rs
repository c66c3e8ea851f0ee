//! Command implementations behind the `jbb` binary: scenario loading,
//! figure/table regeneration, Monte Carlo verification and the uplink sweep.
//! Everything here returns structured results so the integration tests can
//! drive commands without spawning processes; `main.rs` only parses flags and
//! maps errors to exit codes.

pub mod commands;
pub mod scenario;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: malformed scenario, missing field, broken invariant.
    #[error("{0}")]
    Validation(String),
    /// The requested targets cannot be met anywhere on the grid.
    #[error("{0}")]
    Infeasible(String),
    /// A Monte Carlo check exceeded its tolerance.
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

/// What a command sends to stdout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}
