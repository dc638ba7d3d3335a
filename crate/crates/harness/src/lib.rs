//! Configuration-driven experiment harness for the `cmh-core` samplers:
//! replicated GS/CMH efficiency comparisons, chain traces, dataset simulation
//! and ergodicity bounds.

pub mod bounds;
pub mod calibrate;
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod format;
pub mod report;
pub mod trace;

pub use config::{ExperimentConfig, HarnessConfig, TraceConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_all, ExperimentOutcome, Runner};
