//! Configuration-driven front end over the `mdiqkd` model: channel-loss
//! sweeps with per-point signal-intensity optimization, single-point
//! diagnostics, and closed-form-vs-oracle verification.

pub mod config;
pub mod output;
pub mod sweep;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] mdiqkd::ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Process exit code: 1 for config/usage problems, 3 for numerical
    /// conditioning failures. (Verification mismatches exit 2 but are a
    /// report outcome, not an error.)
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Numerical(_) => 3,
        }
    }
}
