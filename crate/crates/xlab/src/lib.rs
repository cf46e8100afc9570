//! Experiment pipelines and command-line plumbing around `xlab-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod report;
pub mod sampling;
pub mod simulate;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentId};
pub use error::{Error, Result};
