//! Experiment harness for `distbell-core`: configurations, runners, reports
//! and the `distbell` command line.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod io;
pub mod report;

pub use config::{ExperimentConfig, ExperimentName, Params};
pub use report::{Expectation, ExperimentReport};
