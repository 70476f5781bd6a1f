//! Experiment harness: configs, the end-to-end pipeline, batch runs and reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{Config, ScenarioConfig};
pub use error::{CliError, CliResult};
