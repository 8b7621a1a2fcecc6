//! Experiment harness around `mowave-core`: JSON configs in, CSV series,
//! SVG plots and checksummed manifests out.

pub mod commands;
pub mod config;
pub mod exit;
pub mod output;

pub use commands::{run_experiment, RunFlags, RunOutcome};
pub use exit::{ExitStatus, HarnessError};
