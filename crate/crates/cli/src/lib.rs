//! Reproducible experiments over the `parlab` library: identity suites,
//! norm scans, subspace witnesses, energy searches and the exponent tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod run;
pub mod suites;

pub use commands::run;
pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use error::{CliError, CliResult};
pub use run::{CaseResult, RunReport};
