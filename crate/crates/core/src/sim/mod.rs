//! Monte-Carlo harness: configuration, the per-CPI loop, summary
//! statistics and CSV output.

pub mod config;
pub mod engine;
pub mod io;
pub mod metrics;

pub use config::{load_config, Overrides, ScenarioConfig};
pub use engine::{run_batch, run_monte_carlo, run_single, RunOutcome};
pub use io::CpiRecord;
