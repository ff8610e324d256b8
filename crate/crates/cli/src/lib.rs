//! Batch experiment runner for the `qmc-basket` engine: reads a JSON
//! configuration, runs pricing, delta, effective-dimension or matrix-dump
//! experiments, and renders reports.

pub mod config;
pub mod report;
pub mod runner;

use thiserror::Error;

pub use config::{ExperimentConfig, Format, OutputSpec, Task};
pub use runner::{dump_points, run, RunOutput};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(qmc_basket::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn from_core(e: qmc_basket::Error) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e)
        } else {
            RunError::Config(e.to_string())
        }
    }

    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures, 1 for I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}
