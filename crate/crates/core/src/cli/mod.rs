//! Batch front end: run configurations in, JSON and CSV out.

mod commands;
mod config;

pub use commands::{
    cmd_optimize, cmd_replicate_infer, cmd_sweep, cmd_utility, fmt_f64, parse_sweep_csv, run,
    Command, Overrides, SweepRows, WORKERS_ENV,
};
pub use config::{EstimatorConfig, ModelConfig, RunConfig};
