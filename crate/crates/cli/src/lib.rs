//! Command-line front end for the `sensekit` spectrum-sensing toolkit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

pub use commands::{emit, run, Command, Report};
pub use config::ExperimentConfig;
pub use error::CliError;
