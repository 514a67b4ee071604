//! Experiment runner for the czreach library: configuration, the demo
//! experiments, artifact rendering and the acceptance suite.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod verify;

pub use config::{parse_config, Experiment, ExperimentConfig};
pub use error::CliError;
pub use experiments::{run_experiment, Outcome};
