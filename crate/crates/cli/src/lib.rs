//! Batch front-end of the irhvac pipeline: run configuration, subcommands
//! and figure output.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
