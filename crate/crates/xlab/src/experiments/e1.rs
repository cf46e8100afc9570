//! E1: empirical Lipschitz ratios of the resolving operator on a ball of `D_T`.
//!
//! For each base datum `b` and unit direction `d`, the ratio at scale `δ` is
//! `sup_t ‖u_b(t) − u_{b+δd}(t)‖_{C^{s−1}} / (δ · ‖d‖_lip)` with
//! `‖d‖_lip = ‖d_u₀‖_{C^{s−1}} + ‖d_z‖_{L¹(C^s)} + ‖d_f‖_{L¹(C^{s−1})}`.
//! The supremum runs over the shared time mesh of both runs. The endpoint
//! ratio uses `‖u_b(T) − u_{b+δd}(T)‖_{C^{s−1}}` alone.

use rayon::prelude::*;
use serde::Serialize;
use xlab_core::solver::{self, SolutionTrajectory};
use xlab_core::{holder_norm, rng, HolderIndex};

use super::{grid, quantile, solver_config, Outcome, REPORT_FILE};
use crate::config::{ExperimentConfig, Perturbation};
use crate::error::Result;
use crate::manifest::{num, Run};
use crate::report::{all_passed, Check};
use crate::sampling::{simplex_weights, Datum, DatumSampler};
use crate::svg::{LogLogPlot, Series};

pub const DOMAIN_BASE: u64 = 0xE101;
pub const DOMAIN_DIRECTION: u64 = 0xE102;
pub const DEFAULT_SAMPLES: usize = 70;

#[derive(Clone, Debug, Serialize)]
pub struct ScaleSummary {
    pub scale: f64,
    pub pairs: usize,
    pub failures: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub p90_ratio: f64,
    pub max_endpoint_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct E1Report {
    pub experiment: &'static str,
    pub manifest: &'static str,
    pub grid: usize,
    pub s: f64,
    pub horizon: f64,
    pub radius: f64,
    pub base_radius: f64,
    pub samples: usize,
    pub perturbation: Perturbation,
    pub scales: Vec<ScaleSummary>,
    pub zero_rows: usize,
    pub failures: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
struct Row {
    base: usize,
    scale: f64,
    kind: &'static str,
    numerator: f64,
    endpoint: f64,
    denominator: f64,
    status: String,
}

impl Row {
    fn ratio(&self) -> f64 {
        if self.kind == "identical" {
            0.0
        } else {
            self.numerator / self.denominator
        }
    }

    fn endpoint_ratio(&self) -> f64 {
        if self.kind == "identical" {
            0.0
        } else {
            self.endpoint / self.denominator
        }
    }

    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// `sup_k ‖a_k − b_k‖_{C^r}` over the shared mesh and the endpoint term.
fn trajectory_distance(a: &SolutionTrajectory, b: &SolutionTrajectory, r: HolderIndex) -> Option<(f64, f64)> {
    if a.times != b.times {
        return None;
    }
    let d: Vec<f64> = a.velocity.iter().zip(&b.velocity).map(|(x, y)| holder_norm(&(x - y), r)).collect();
    Some((d.iter().copied().fold(0.0, f64::max), *d.last()?))
}

fn base_rows(cfg: &ExperimentConfig, sampler: &DatumSampler, b: usize) -> Vec<Row> {
    let s = cfg.index_s();
    let r = cfg.index_s_minus_one();
    let p = &cfg.e1;
    let base_radius = (cfg.radius - p.scales[0]).max(0.0);
    let solver_cfg = solver_config(sampler.grid, p.dt);

    let mut rng_b = rng::stream(cfg.seed, DOMAIN_BASE, b as u64);
    let w = simplex_weights(&mut rng_b);
    let base = sampler.sample(base_radius, w, &mut rng_b);
    let mut rng_d = rng::stream(cfg.seed, DOMAIN_DIRECTION, b as u64);
    let wd = match p.perturbation {
        Perturbation::All => simplex_weights(&mut rng_d),
        Perturbation::ForceOnly => [0.0, 0.0, 1.0],
    };
    let dir = sampler.sample(1.0, wd, &mut rng_d);

    let fail = |scale: f64, kind: &'static str, msg: String| Row {
        base: b,
        scale,
        kind,
        numerator: f64::NAN,
        endpoint: f64::NAN,
        denominator: f64::NAN,
        status: msg,
    };
    let run = |d: &Datum| -> Result<SolutionTrajectory> { Ok(solver::solve(&d.triple()?, &solver_cfg)?) };
    let base_traj = match run(&base) {
        Ok(t) => t,
        Err(e) => return p.scales.iter().map(|&sc| fail(sc, "pair", format!("base: {e}"))).collect(),
    };
    let den = match dir.lipschitz_norm(s, r) {
        Ok(v) => v,
        Err(e) => return p.scales.iter().map(|&sc| fail(sc, "pair", format!("direction: {e}"))).collect(),
    };

    let (numerator, endpoint) = trajectory_distance(&base_traj, &base_traj, r).unwrap_or((f64::NAN, f64::NAN));
    let mut rows = vec![Row {
        base: b,
        scale: 0.0,
        kind: "identical",
        numerator,
        endpoint,
        denominator: 0.0,
        status: "ok".into(),
    }];
    for &scale in &p.scales {
        let row = match run(&base.axpy(scale, &dir)) {
            Err(e) => fail(scale, "pair", e.to_string()),
            Ok(traj) => match trajectory_distance(&base_traj, &traj, r) {
                None => fail(scale, "pair", "time meshes differ".into()),
                Some((numerator, endpoint)) => Row {
                    base: b,
                    scale,
                    kind: "pair",
                    numerator,
                    endpoint,
                    denominator: scale * den,
                    status: "ok".into(),
                },
            },
        };
        rows.push(row);
    }
    rows
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome<E1Report>> {
    let p = &cfg.e1;
    let g = grid(cfg.grid)?;
    let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let sampler = DatumSampler::new(g, cfg.index_s(), p.intervals, cfg.horizon);
    let mut run = Run::create(&cfg.output, "E1")?;
    run.seed_stage("base data", DOMAIN_BASE);
    run.seed_stage("perturbation directions", DOMAIN_DIRECTION);

    let rows: Vec<Row> = run.time("solve pairs", || {
        (0..samples).into_par_iter().flat_map_iter(|b| base_rows(cfg, &sampler, b)).collect()
    });

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.base.to_string(),
                r.scale.to_string(),
                r.kind.into(),
                num(r.numerator),
                num(r.endpoint),
                num(r.denominator),
                if r.ok() { num(r.ratio()) } else { String::new() },
                if r.ok() { num(r.endpoint_ratio()) } else { String::new() },
                r.status.clone(),
            ]
        })
        .collect();
    run.write_csv(
        "e1_ratios.csv",
        &["base", "scale", "kind", "numerator", "endpoint_numerator", "denominator", "ratio", "endpoint_ratio", "status"],
        &csv_rows,
    )?;

    let scales: Vec<ScaleSummary> = p
        .scales
        .iter()
        .map(|&scale| {
            let at: Vec<&Row> = rows.iter().filter(|r| r.kind == "pair" && r.scale == scale).collect();
            let ok: Vec<&&Row> = at.iter().filter(|r| r.ok()).collect();
            let mut ratios: Vec<f64> = ok.iter().map(|r| r.ratio()).collect();
            ratios.sort_by(f64::total_cmp);
            let max_endpoint_ratio = ok.iter().map(|r| r.endpoint_ratio()).fold(f64::NAN, f64::max);
            ScaleSummary {
                scale,
                pairs: ratios.len(),
                failures: at.len() - ratios.len(),
                max_ratio: ratios.last().copied().unwrap_or(f64::NAN),
                median_ratio: quantile(&ratios, 0.5),
                p90_ratio: quantile(&ratios, 0.9),
                max_endpoint_ratio,
            }
        })
        .collect();
    let summary_rows: Vec<Vec<String>> = scales
        .iter()
        .map(|s| {
            vec![
                s.scale.to_string(),
                s.pairs.to_string(),
                s.failures.to_string(),
                num(s.max_ratio),
                num(s.median_ratio),
                num(s.p90_ratio),
                num(s.max_endpoint_ratio),
            ]
        })
        .collect();
    run.write_csv(
        "e1_summary.csv",
        &["scale", "pairs", "failures", "max_ratio", "median_ratio", "p90_ratio", "max_endpoint_ratio"],
        &summary_rows,
    )?;
    let plot = LogLogPlot {
        title: "Lipschitz ratio by perturbation scale".into(),
        x_label: "scale".into(),
        y_label: "ratio".into(),
        series: vec![
            Series { name: "max".into(), points: scales.iter().map(|s| (s.scale, s.max_ratio)).collect() },
            Series { name: "median".into(), points: scales.iter().map(|s| (s.scale, s.median_ratio)).collect() },
            Series { name: "max at T".into(), points: scales.iter().map(|s| (s.scale, s.max_endpoint_ratio)).collect() },
        ],
    };
    run.write("e1_ratios.svg", plot.render().as_bytes())?;

    let zero_rows = rows.iter().filter(|r| r.kind == "identical" && r.numerator == 0.0).count();
    let failures = rows.iter().filter(|r| !r.ok()).count();
    let total_pairs: usize = scales.iter().map(|s| s.pairs).sum();
    let mut checks = vec![
        Check::at_least("pairs", total_pairs as f64, p.min_pairs as f64),
        Check::at_most("identical-triple rows with nonzero numerator", (samples - zero_rows) as f64, 0.0),
    ];
    for w in scales.windows(2) {
        checks.push(Check::at_most(
            format!("max ratio at scale {} (vs {} at scale {})", w[1].scale, w[0].max_ratio, w[0].scale),
            w[1].max_ratio,
            (1.0 + p.growth_tolerance) * w[0].max_ratio,
        ));
    }
    let passed = all_passed(&checks);
    let report = E1Report {
        experiment: "E1",
        manifest: crate::manifest::MANIFEST_FILE,
        grid: cfg.grid,
        s: cfg.s,
        horizon: cfg.horizon,
        radius: cfg.radius,
        base_radius: (cfg.radius - p.scales[0]).max(0.0),
        samples,
        perturbation: p.perturbation,
        scales,
        zero_rows,
        failures,
        checks,
        passed,
    };
    run.write_json(REPORT_FILE, &report)?;
    let manifest = run.finish(cfg, Some(REPORT_FILE), serde_json::json!({ "numerator_metric": format!("C^{}", cfg.s - 1.0) }))?;
    Ok(Outcome { report, manifest, passed })
}
