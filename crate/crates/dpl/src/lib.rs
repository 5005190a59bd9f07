//! Batch front end for the dyadic checks: configurations, reports and
//! the file formats they are written in.

pub mod checks;
pub mod config;
pub mod error;
pub mod formats;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use runner::{run, write_outputs, RunOutcome};
