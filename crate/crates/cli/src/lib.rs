//! Experiment runner for the rotated sparse polynomial chaos benchmarks.
//!
//! Configs are TOML files (see [`config`]); [`runner::run_experiment`] sweeps
//! sample counts, methods and seeded trials and produces one CSV row per
//! rotation step plus a per-cell summary.

pub mod config;
pub mod defaults;
pub mod error;
pub mod runner;

pub use config::{ExperimentConfig, MethodConfig};
pub use defaults::{emit_defaults, render};
pub use error::{CliError, Result};
pub use runner::{run_experiment, write_outputs, ExperimentOutput, ResultRow, Summary};
