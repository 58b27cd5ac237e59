//! Configuration, presets, sweeps and file output for the biphoton pipeline.

pub mod config;
pub mod error;
pub mod freq;
pub mod run;

pub use config::{preset, ScenarioConfig};
pub use error::{CliError, Result};
pub use freq::Freq;
pub use run::{run_scenario, run_sweep};
