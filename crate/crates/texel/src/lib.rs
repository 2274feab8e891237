//! Experiment harness for the TEXEL simulator: typed TOML configurations,
//! deterministic CSV/JSON outputs with run manifests, static validation and
//! a parallel worker pool that never changes results.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod simulate;
pub mod suite;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Context;
pub use experiments::{run_experiment, run_in_memory, shipped_config, validate_config, ExperimentSpec, Outputs, NAMES};
pub use manifest::Manifest;
pub use validate::Report;
