//! Batch pipeline for Fourier spot-variance estimation and the variance-swap link regressions.
//!
//! The numerics live in [`spotvar_core`]; this crate adds configuration, CSV ingestion,
//! report formatting, the staged pipeline and the `spotvar` command-line tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod pipeline;
pub mod report;

pub use config::PipelineConfig;
pub use error::{AppError, AppResult};
pub use pipeline::{run_command, run_pipeline, Command, RunManifest};
