//! Experiment harness over `embodykit_core`: every subcommand is a pure
//! function of its config and seed that returns tables, plus a writer that
//! turns them into CSV, SVG, JSON and PPM artifacts.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod svg;

pub use error::{CliError, CliResult};
