//! Front end for the `hybcu` solver: mixing plans, experiment runs and the
//! Gauss-Seidel divergence table.

pub mod args;
pub mod commands;
pub mod config;

pub use args::{Cli, Command};
pub use commands::{cmd_divergence, cmd_mix, cmd_run, MixOutcome, RunOutcome};
pub use config::{Experiment, Method, RunConfig};

/// Exit code for a bad configuration or command line.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when pinned mixing entries admit no plan.
pub const EXIT_INFEASIBLE: i32 = 3;
/// Exit code for any other failure.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error(transparent)]
    Runtime(hybcu::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<hybcu::Error> for CliError {
    fn from(e: hybcu::Error) -> Self {
        match e {
            hybcu::Error::InfeasibleConstraints(_) => CliError::Infeasible(e.to_string()),
            hybcu::Error::InvalidParameter(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other),
        }
    }
}
