//! Experiment runner for `hpl`: configuration files, the acceptance
//! checks and their CSV output.

pub mod checks;
pub mod config;
pub mod error;
pub mod run;
pub mod table;
pub mod verify;

pub use config::{ExperimentConfig, Kind, DEFAULT_SEED};
pub use error::{CliError, Result};
