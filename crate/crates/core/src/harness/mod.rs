//! Seeded experiment orchestration, reports, and the command-line entry
//! point.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod report;

pub use cli::cli_main;
pub use config::{Check, ExperimentConfig, Thresholds};
pub use experiment::{replicate_stream, run_experiment, THREADS_ENV};
pub use report::ExperimentReport;
