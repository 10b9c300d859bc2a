//! Experiment harness for the DP-NFDM toolkit.
//!
//! * [`config`]: versioned TOML scenario files.
//! * [`run`]: sweep execution over blocks, deterministic for a given seed.
//! * [`report`]: CSV/JSON reports and constellation dumps.
//! * [`acceptance`]: the acceptance properties behind `dpnfdm selftest`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{Mode, ScenarioConfig, SCHEMA};
pub use error::{CliError, Result};
pub use report::{emit_report, Format};
pub use run::{run_scenario, RunReport};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "DPNFDM_THREADS";

/// Sizes the global worker pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| CliError::Config {
        field: THREADS_ENV.to_string(),
        reason: format!("`{value}` is not a thread count"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config {
            field: THREADS_ENV.to_string(),
            reason: e.to_string(),
        })
}
