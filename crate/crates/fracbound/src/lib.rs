//! Command-line companion to `fracbound-core`: JSON configuration, CSV/JSON
//! output, and thread-count-invariant parallel execution of the path
//! ensembles.

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;

pub use commands::Outcome;
pub use config::RunConfig;
