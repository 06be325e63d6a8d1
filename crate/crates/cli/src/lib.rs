//! Configuration loading and stage orchestration behind the `submig` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod pipeline;

pub use config::{load_config, parse_config, ConfigError, Format, RunConfig};
pub use pipeline::{run_all, run_image, run_simulate, run_verify, verify, PipelineError, Setup, VerifyReport};
