//! Experiment harness for load-balanced routing: configuration, randomized
//! trials, aggregation, CSV output, and the text formats used by the CLI.

pub mod config;
pub mod dot;
pub mod experiment;
pub mod format;

pub use config::{ConfigError, ExperimentConfig};
pub use experiment::{aggregate, run_experiment, run_instance, run_trial, Method, Summary, SummaryRow, TrialRecord};
