//! Experiment driver for the singularly perturbed Schrödinger–Bopp–Podolsky
//! system on the flat 3-torus.

pub mod commands;
pub mod config;

pub use commands::{constant_branch, ground_state, profile_check, solve, sweep, SweepRow, SweepSummary};
pub use config::ExperimentConfig;

use sbpp_core::Error;

/// Process exit status for validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit status for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core(e) => match e {
                Error::Parameter { .. } | Error::GridMismatch | Error::Format(_) | Error::Io(_) => EXIT_VALIDATION,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}
