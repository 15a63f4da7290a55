//! Configuration, experiment dispatch, sweeps and result files for the
//! `transmon` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod sweep;

pub use config::{Experiment, OutputFormat, RunConfig, SweepAxis};
pub use error::{CliError, Result};
pub use experiments::{run, ExperimentResult};
pub use sweep::{sweep, SweepPoint};
