//! Experiment harness for `fermihart-core`: JSON configuration, metrics and
//! density output, and the subcommands of the `fermihart` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dump;
pub mod metrics;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] fermihart_core::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// 1 for configuration, 2 for solver and 3 for validation failures.
    /// Output errors count as configuration errors since a bad `--out` is
    /// the usual cause.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) | Self::Csv(_) | Self::Json(_) => 1,
            Self::Solver(fermihart_core::Error::InvalidParameter(_) | fermihart_core::Error::EvenGridSize { .. }) => 1,
            Self::Solver(_) => 2,
            Self::Validation(_) => 3,
        }
    }
}
