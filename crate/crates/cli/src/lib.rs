//! Configuration, staged pipeline and verification suites for the `phasekit` binary.

pub mod config;
pub mod pipeline;
pub mod verify;

pub use config::{ConfigError, RunConfig};
pub use pipeline::{Pipeline, PipelineError};
