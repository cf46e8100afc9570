//! The four experiment pipelines. Each writes CSV outputs, a JSON report and
//! a manifest into the configured output directory.

pub mod e1;
pub mod e2;
pub mod e3;
pub mod e4;

use serde::Serialize;
use xlab_core::solver::SolverConfig;
use xlab_core::TorusGrid;

use crate::config::{ExperimentConfig, ExperimentId};
use crate::error::{Error, Result};
use crate::manifest::RunManifest;

pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug)]
pub struct Outcome<R> {
    pub report: R,
    pub manifest: RunManifest,
    pub passed: bool,
}

/// Result of any experiment with its report as JSON.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: ExperimentId,
    pub passed: bool,
    pub report: serde_json::Value,
    pub content_hash: String,
}

impl<R: Serialize> Outcome<R> {
    pub fn summary(&self, id: ExperimentId) -> Result<Summary> {
        Ok(Summary {
            experiment: id,
            passed: self.passed,
            report: serde_json::to_value(&self.report)?,
            content_hash: self.manifest.content_hash.clone(),
        })
    }
}

/// Validates `cfg` and runs experiment `id` on a pool of `cfg.workers` threads.
pub fn run(id: ExperimentId, cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let cfg = ExperimentConfig { experiment: Some(id), ..cfg.clone() };
    crate::manifest::with_workers(cfg.workers, || match id {
        ExperimentId::E1 => e1::run(&cfg)?.summary(id),
        ExperimentId::E2 => e2::run(&cfg)?.summary(id),
        ExperimentId::E3 => e3::run(&cfg)?.summary(id),
        ExperimentId::E4 => e4::run(&cfg)?.summary(id),
    })?
}

pub(crate) fn grid(n: usize) -> Result<TorusGrid> {
    TorusGrid::new(n).map_err(|e| Error::Config(e.to_string()))
}

/// Semi-Lagrangian configuration with step bound `dt`, recording every step.
pub(crate) fn solver_config(grid: TorusGrid, dt: f64) -> SolverConfig {
    SolverConfig::new(grid).with_dt(dt)
}

pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted[((sorted.len() - 1) as f64 * q).round() as usize]
}
