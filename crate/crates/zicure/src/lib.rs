//! File formats, the command-line pipelines and the parallel Monte Carlo
//! runner for the zero-inflated Weibull cure rate model in `zicure-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod meta;
pub mod model;
pub mod report;
pub mod study;

pub use error::{CliError, Result};
