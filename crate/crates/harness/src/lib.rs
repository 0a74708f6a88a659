//! Experiment harness: seeded instance generation, runs with certified
//! bound checks, traces, sweeps and the `invlin` CLI.

pub mod config;
pub mod error;
pub mod family;
pub mod generate;
pub mod run;
pub mod stream;
pub mod sweep;
pub mod trace;

pub use config::{ExperimentConfig, GapTarget, Overrides};
pub use error::{HarnessError, Result};
pub use generate::{generate_instance_stream, InstanceStream};
pub use run::{run_experiment, run_stream, RunOutput, RunReport};
