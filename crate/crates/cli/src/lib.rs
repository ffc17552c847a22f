//! File formats, experiment orchestration and chart output for the retail
//! department simulator in `manprasim-core`.

pub mod app;
pub mod charts;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod runner;
pub mod scenario;

pub use app::{run, RunOptions, RunOutcome};
pub use config::{load_department, parse_department, to_toml};
pub use error::{CliError, ConfigLoadError};
