//! Config-driven runner around the `mixbound` library: simulations with bound
//! checks, ensemble constant estimates, and SVG plots of recorded runs.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod report;
pub mod sink;

pub use error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MIXBOUND_THREADS";
