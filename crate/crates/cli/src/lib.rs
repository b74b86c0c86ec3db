//! File formats, the experiment runner and the command-line front end for
//! `asdal-core`.

pub mod config;
pub mod dataset;
pub mod error;
pub mod results;
pub mod runner;
pub mod seed;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use results::ResultRow;
pub use runner::run_experiment;
