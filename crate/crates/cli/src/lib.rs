//! Orchestration around the estimation library: experiment configs,
//! end-to-end runs with resource accounting, verification suites and the
//! baseline-vs-replay benchmark grid. The `cst` binary is a thin clap
//! wrapper over these modules.

use std::fmt;

pub mod bench;
pub mod config;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{ExperimentConfig, Mode, Overrides};
pub use report::{ObservableReport, RunReport, Timing, Totals};
pub use runner::{run_experiment, RunOutput};

/// Top-level failure classes, one per process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad config file, bad flags, impossible parameter combinations. Exit 3.
    Config(String),
    /// A verification suite ran and found a violated invariant. Exit 2.
    Verification(String),
    /// Everything else that stops a run (io, numerics, caps). Exit 1.
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        CliError::Runtime(msg.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<shadow_core::Error> for CliError {
    fn from(e: shadow_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
