//! Configuration, quantity catalogue and runner behind the `qfluct` binary.

pub mod config;
pub mod quantity;
pub mod runner;

pub use config::{validate_config, ConfigErrors, ConfigIssue, ExperimentConfig, ExperimentKind};
pub use runner::{compute, render_csv, write_outputs, Row, RunError, RunOutput};
