//! Command-line front end of the IRS-assisted FSO simulator: configuration
//! parsing, experiment runners and CSV result tables.

pub mod config;
pub mod run;
pub mod table;

use thiserror::Error;

pub use config::{load_config, ConfigError, ExperimentConfig};
pub use run::{run_delay, run_field_map, run_outage, run_power_sweep};
pub use table::{Cell, ResultTable};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "IRSFSO_WORKERS";

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<irsfso_core::Error> for AppError {
    fn from(e: irsfso_core::Error) -> Self {
        match e {
            irsfso_core::Error::NonFinite(_) | irsfso_core::Error::NoCrossing(_) => {
                AppError::Numerical(e.to_string())
            }
            _ => AppError::Invalid(e.to_string()),
        }
    }
}

impl AppError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Invalid(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Io(_) => 4,
        }
    }
}
