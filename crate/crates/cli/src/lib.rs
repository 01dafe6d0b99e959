//! Command-line front end: JSON experiment configs, runs, comparisons,
//! sweeps and SVG plots.

pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{execute, run_experiment, Experiment, Summary};

pub const THREADS_VAR: &str = "FEDCLIP_THREADS";

/// Worker threads from `FEDCLIP_THREADS`, else the hardware parallelism.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Env {
                var: THREADS_VAR,
                message: format!("expected a positive integer, got {v:?}"),
            }),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
