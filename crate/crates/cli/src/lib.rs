//! Batch front-end for modulus experiments: JSON configurations in, CSV and
//! JSON artifacts plus a run manifest out.

pub mod config;
pub mod plots;
pub mod run;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{Failure, ReportSet};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "MODLAB_THREADS";

/// Reads the thread cap; `None` when the variable is unset.
pub fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Validation(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Failure::Validation(format!("{THREADS_ENV} = {v:?} must be a positive integer"))),
        },
    }
}
