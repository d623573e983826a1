//! Configuration and execution for the `a2i` experiment runner.

pub mod config;
pub mod run;

pub use config::{ConfigError, Experiment, ExperimentConfig, Resolved};
pub use run::{run, Overrides, RunError, RunOutput};
