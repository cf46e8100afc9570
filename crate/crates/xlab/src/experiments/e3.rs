//! E3: the step-function ε-net of `W^{1,1}` balls, by Monte Carlo on the
//! quantizer and by a table of net cardinalities.

use rayon::prelude::*;
use serde::Serialize;
use xlab_core::entropy::{log_grid, sample_w11_ball, w11_net_params, w11_quantize};
use xlab_core::{rng, Error as CoreError};

use super::{Outcome, REPORT_FILE};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::manifest::{num, Run};
use crate::report::{all_passed, Check};
use crate::svg::{LogLogPlot, Series};

pub const DOMAIN: u64 = 0xE301;
pub const DEFAULT_SAMPLES: usize = 1000;
/// Default ε grid of the cardinality table: 25 log-spaced values.
pub const TABLE_EPS: (f64, f64, usize) = (0.5, 0.01, 25);
/// Net parameters that must be reproduced at `R = 1`, `ε = 0.5`.
pub const ANCHOR: (f64, f64, u64, u64) = (1.0, 0.5, 5, 41);

#[derive(Clone, Debug, Serialize)]
pub struct CaseSummary {
    pub radius: f64,
    pub eps: f64,
    pub intervals: u64,
    pub levels: u64,
    pub error_bound: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub max_error: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSummary {
    pub radius: f64,
    pub max_ratio: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct E3Report {
    pub experiment: &'static str,
    pub manifest: &'static str,
    pub samples: usize,
    pub cases: Vec<CaseSummary>,
    pub growth: Vec<GrowthSummary>,
    pub anchor: (u64, u64),
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Sample {
    w11: f64,
    error: f64,
    status: String,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome<E3Report>> {
    let p = &cfg.e3;
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let table_eps = cfg.eps.clone().unwrap_or_else(|| log_grid(TABLE_EPS.0, TABLE_EPS.1, TABLE_EPS.2));
    if table_eps.iter().any(|&e| !(e < 1.0)) {
        return Err(Error::Config("cardinality table needs ε < 1".into()));
    }
    let mut run = Run::create(&cfg.output, "E3")?;
    run.seed_stage("W^{1,1} samples (domain + case index)", DOMAIN);

    let mut quant_rows = Vec::new();
    let mut cases = Vec::new();
    for (c, &(radius, eps)) in p.cases.iter().enumerate() {
        let params = w11_net_params(radius, eps)?;
        let results: Vec<Sample> = run.time(&format!("quantize R={radius} eps={eps}"), || {
            (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut r = rng::stream(cfg.seed, DOMAIN + c as u64, i);
                    let u = sample_w11_ball(radius, p.max_pieces, &mut r);
                    match w11_quantize(&u, &params) {
                        Ok(q) => Sample { w11: u.w11_norm(), error: q.error, status: "ok".into() },
                        Err(e @ CoreError::OutOfBall { .. }) => {
                            Sample { w11: u.w11_norm(), error: f64::NAN, status: format!("rejected: {e}") }
                        }
                        Err(e) => Sample { w11: u.w11_norm(), error: f64::NAN, status: format!("error: {e}") },
                    }
                })
                .collect()
        });
        for (i, s) in results.iter().enumerate() {
            quant_rows.push(vec![
                radius.to_string(),
                eps.to_string(),
                i.to_string(),
                s.w11.to_string(),
                num(s.error),
                params.error_bound().to_string(),
                s.status.clone(),
            ]);
        }
        let accepted: Vec<f64> = results.iter().filter(|s| s.status == "ok").map(|s| s.error).collect();
        cases.push(CaseSummary {
            radius,
            eps,
            intervals: params.intervals,
            levels: params.levels,
            error_bound: params.error_bound(),
            accepted: accepted.len(),
            rejected: results.len() - accepted.len(),
            max_error: accepted.iter().copied().fold(0.0, f64::max),
            violations: accepted.iter().filter(|&&e| e > eps).count(),
        });
    }
    run.write_csv(
        "e3_quantizer.csv",
        &["radius", "eps", "sample", "w11_norm", "l1_error", "error_bound", "status"],
        &quant_rows,
    )?;

    let mut table_rows = Vec::new();
    let mut growth = Vec::new();
    let mut series = Vec::new();
    for &radius in &p.table_radii {
        let mut max_ratio = 0.0_f64;
        let mut pts = Vec::new();
        for &eps in &table_eps {
            let params = w11_net_params(radius, eps)?;
            let ln_card = params.ln_cardinality();
            let scale = eps.recip() * eps.recip().ln();
            let ratio = ln_card / scale;
            max_ratio = max_ratio.max(ratio);
            pts.push((eps, ratio));
            table_rows.push(vec![
                radius.to_string(),
                eps.to_string(),
                params.intervals.to_string(),
                params.levels.to_string(),
                ln_card.to_string(),
                scale.to_string(),
                ratio.to_string(),
                params.cardinality().to_string().len().to_string(),
            ]);
        }
        growth.push(GrowthSummary { radius, max_ratio, bound: p.growth_constant * radius });
        series.push(Series { name: format!("R = {radius}"), points: pts });
    }
    run.write_csv(
        "e3_table.csv",
        &["radius", "eps", "intervals", "levels", "ln_cardinality", "eps_growth", "ratio", "decimal_digits"],
        &table_rows,
    )?;
    let plot = LogLogPlot {
        title: "ln|net| / (ε⁻¹ ln ε⁻¹)".into(),
        x_label: "ε".into(),
        y_label: "ratio".into(),
        series,
    };
    run.write("e3_growth.svg", plot.render().as_bytes())?;

    let anchor = w11_net_params(ANCHOR.0, ANCHOR.1)?;
    let mut checks = vec![Check::at_most(
        format!("net parameters at R={}, ε={} differ from ({}, {})", ANCHOR.0, ANCHOR.1, ANCHOR.2, ANCHOR.3),
        (anchor.intervals.abs_diff(ANCHOR.2) + anchor.levels.abs_diff(ANCHOR.3)) as f64,
        0.0,
    )];
    for c in &cases {
        checks.push(Check::at_most(format!("max L1 error at R={}, ε={}", c.radius, c.eps), c.max_error, c.eps));
        checks.push(Check::at_most(format!("errors above ε at R={}, ε={}", c.radius, c.eps), c.violations as f64, 0.0));
    }
    for g in &growth {
        checks.push(Check::at_most(format!("max cardinality ratio at R={}", g.radius), g.max_ratio, g.bound));
    }
    let passed = all_passed(&checks);
    let report = E3Report {
        experiment: "E3",
        manifest: crate::manifest::MANIFEST_FILE,
        samples,
        cases,
        growth,
        anchor: (anchor.intervals, anchor.levels),
        checks,
        passed,
    };
    run.write_json(REPORT_FILE, &report)?;
    let manifest = run.finish(cfg, Some(REPORT_FILE), serde_json::Value::Null)?;
    Ok(Outcome { report, manifest, passed })
}
