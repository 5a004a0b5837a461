//! Batch front end: job configs, a checksummed cache, the pipeline and run reports.

pub mod cache;
pub mod config;
pub mod jobs;
pub mod report;
pub mod selftest;

use thiserror::Error;

pub use cache::{Cache, CacheError};
pub use config::{JobConfig, Task};
pub use jobs::{run_job, RunOptions};
pub use report::RunReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("hypotheses failed: {0:?}")]
    Hypotheses(Vec<String>, Box<RunReport>),
    #[error(transparent)]
    Compute(#[from] anticyclo_core::Error),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for config errors, 3 for failed hypotheses, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypotheses(..) => 3,
            _ => 4,
        }
    }
}
