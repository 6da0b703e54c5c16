//! Configuration-driven front end for `fklab-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CmdError, Command, RunSummary};
pub use config::{ConfigError, RunConfig};
