//! Command-line front end and file formats for `fuzzypov-core`: microdata
//! CSV loading, JSON run configs and manifests, parallel execution of
//! Monte Carlo replicates and parameter grids, and the `fuzzypov` binary's
//! subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod runner;

pub use config::{Manifest, RunConfig};
pub use error::CliError;
pub use fuzzypov_core as core;
