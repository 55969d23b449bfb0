//! Batch front end: configuration and run orchestration.

pub mod config;
pub mod run;

pub use config::{ConfigError, InitialKind, RunConfig};
pub use run::{run, run_dispersion, run_evolve, run_greens, run_poles, run_sweep, Command, Outcome, RunError};
