//! Instance generation, experiment runners and artifact output for the
//! `dixmier` command-line tool.

pub mod candidates;
pub mod commands;
pub mod instance;
pub mod output;

pub use commands::Outcome;
pub use instance::{generate, Instance, InstanceSpec, Kind};
