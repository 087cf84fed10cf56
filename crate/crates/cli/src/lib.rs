//! Experiment driver for biased zeroth-order optimization: replicated
//! runs, objective histograms, bound surfaces and the verification suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod verify;

pub use error::{CliError, CliResult};
