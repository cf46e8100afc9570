//! E2: entropy of the attainable cloud against a Hölder-ball cloud.
//!
//! Both clouds hold the same number of fields and use the same discrete
//! `C^{s−1}` metric. Each cloud's ε grid is one relative grid times that
//! cloud's median distance; slopes are fitted on the grid points where both
//! clouds are unsaturated.

use rayon::prelude::*;
use serde::Serialize;
use xlab_core::control::{self, make_control_space, ControlSpace, FieldNorm};
use xlab_core::entropy::{
    self, empirical_lipschitz, fit_slope, greedy_packing, lipschitz_image_bound, log_grid, EntropyPoint,
    FitWindow, MetricCloud, SlopeFit,
};
use xlab_core::holder::{HolderBallSampler, HolderFeatures, Separations};
use xlab_core::solver::ForcingPath;
use xlab_core::{rng, HolderIndex, TorusGrid, VectorField2D};

use super::{grid, solver_config, Outcome, REPORT_FILE};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::manifest::Run;
use crate::report::{all_passed, Check};
use crate::svg::{LogLogPlot, Series};

pub const DOMAIN_HOLDER: u64 = 0xE201;
pub const DOMAIN_CONTROLS: u64 = 0xE202;
pub const DEFAULT_SAMPLES: usize = 2000;
/// Samples entering the Lipschitz-image cross-check.
pub const LIPSCHITZ_SUBSET: usize = 100;
/// Relative ε grid of the one-decade Hölder slope fit.
pub const DECADE: (f64, f64, usize) = (1.0, 0.1, 12);

pub const STATEMENT: &str = "The claim under study is that the complement of the attainable set is dense in the \
Hölder space of divergence-free fields. Density is not testable numerically. This experiment is its \
property-based substitute: it compares the entropy growth of a sampled attainable set with that of a \
sampled Hölder ball of higher regularity. Both clouds have the same size and metric and are fitted on \
one matched ε window. \
Finite-sample slopes measure effective dimension below saturation, not the asymptotic exponents.";

#[derive(Clone, Debug, Serialize)]
pub struct CloudSummary {
    pub samples: usize,
    pub median_distance: f64,
    pub diameter: f64,
    /// Fit over the whole relative grid with the default trim.
    pub full_fit: Option<SlopeFit>,
    pub full_fit_error: Option<String>,
    /// Fit over the matched window.
    pub window_fit: Option<SlopeFit>,
    pub window_fit_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchedWindow {
    pub rel_eps_max: f64,
    pub rel_eps_min: f64,
    pub points: usize,
    pub first_index: Option<usize>,
    pub last_index: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzImageSummary {
    pub samples: usize,
    pub lipschitz: f64,
    pub violations: usize,
    pub eps_values: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct E2Report {
    pub experiment: &'static str,
    pub statement: &'static str,
    pub manifest: &'static str,
    pub grid: usize,
    pub s: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub ball_index: f64,
    pub ball_index_nudged: bool,
    pub ball_radius: f64,
    pub control_radius: f64,
    pub control_norm: FieldNorm,
    pub wave_vectors: Vec<(i64, i64)>,
    pub metric_index: f64,
    pub holder: CloudSummary,
    pub attainable: CloudSummary,
    pub window: MatchedWindow,
    pub gap: f64,
    pub holder_decade_fit: Option<SlopeFit>,
    pub expected_holder_slope: f64,
    pub lipschitz_image: Option<LipschitzImageSummary>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn features(u: &VectorField2D, metric: HolderIndex) -> HolderFeatures {
    HolderFeatures::new(u, metric, Separations::Dyadic)
}

/// Samples of the Hölder ball of index `ball` and radius `radius`.
pub fn holder_cloud(
    g: TorusGrid,
    ball: HolderIndex,
    radius: f64,
    metric: HolderIndex,
    count: usize,
    seed: u64,
) -> MetricCloud {
    let sampler = HolderBallSampler::new(ball, radius, g);
    let feats: Vec<HolderFeatures> = (0..count as u64)
        .into_par_iter()
        .map(|i| features(&sampler.sample(g, rng::sub_seed(seed, DOMAIN_HOLDER, i)), metric))
        .collect();
    MetricCloud::from_features(&feats)
}

fn packing_points(cloud: &MetricCloud, eps: &[f64]) -> Vec<EntropyPoint> {
    eps.par_iter()
        .map(|&e| EntropyPoint {
            eps: e,
            packing: greedy_packing(cloud, e).count,
            packing_2eps: greedy_packing(cloud, 2.0 * e).count,
        })
        .collect()
}

fn scale_of(cloud: &MetricCloud) -> f64 {
    let m = cloud.median_distance();
    if m > 0.0 && m.is_finite() {
        m
    } else {
        1.0
    }
}

fn curve_rows(points: &[EntropyPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| vec![p.eps.to_string(), p.packing.to_string(), p.ln_inv_eps().to_string(), p.ln_packing().to_string()])
        .collect()
}

const CURVE_HEADER: [&str; 4] = ["eps", "packing", "ln_inv_eps", "ln_packing"];

/// Distance `‖y − y'‖ + sup_t ‖z − z'‖` between two controls.
fn relaxation_distance(
    a: &control::BmSample,
    b: &control::BmSample,
    za: &control::PrimitivePath,
    zb: &control::PrimitivePath,
    norm: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    let diff = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
    let sup = za.nodes().iter().zip(zb.nodes()).map(|(p, q)| norm(&diff(p, q))).fold(0.0, f64::max);
    norm(&diff(&a.y, &b.y)) + sup
}

fn summarize(cloud: &MetricCloud, points: &[EntropyPoint], window: Option<(usize, usize)>) -> CloudSummary {
    let (full_fit, full_fit_error) = match fit_slope(points, FitWindow::default()) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (window_fit, window_fit_error) = match window {
        None => (None, Some("matched window is empty or too short".to_string())),
        Some((lo, hi)) => match fit_slope(&points[lo..=hi], FitWindow::ALL) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    CloudSummary {
        samples: cloud.len(),
        median_distance: cloud.median_distance(),
        diameter: cloud.diameter(),
        full_fit,
        full_fit_error,
        window_fit,
        window_fit_error,
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome<E2Report>> {
    let p = &cfg.e2;
    let g = grid(cfg.grid)?;
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let s = cfg.index_s();
    let metric = cfg.index_s_minus_one();
    let (ball, nudged) = cfg.ball_index();
    if !(p.rel_eps_hi > p.rel_eps_lo && p.rel_eps_lo > 0.0 && p.eps_points >= 2) {
        return Err(Error::Config("E2 relative ε grid must satisfy hi > lo > 0 with at least two points".into()));
    }
    let space: ControlSpace = make_control_space(g, &p.wave_vectors)?;
    let u0 = match p.u0_seed {
        Some(seed) => HolderBallSampler::new(s, cfg.radius, g).sample(g, seed),
        None => VectorField2D::zeros(g),
    };
    let h = ForcingPath::zero();
    let control_norm = FieldNorm::Holder(s);
    let solver_cfg = solver_config(g, p.dt);

    let mut run = Run::create(&cfg.output, "E2")?;
    run.seed_stage("Hölder-ball samples", DOMAIN_HOLDER);
    run.seed_stage("controls in B_m", DOMAIN_CONTROLS);

    let holder = run.time("Hölder cloud", || holder_cloud(g, ball, cfg.radius, metric, n, cfg.seed));

    let controls = control::sample_bm(
        &space,
        control_norm,
        p.m,
        n,
        rng::sub_seed(cfg.seed, DOMAIN_CONTROLS, 0),
        p.intervals,
        cfg.horizon,
    );
    let primitives: Vec<control::PrimitivePath> = controls.iter().map(|c| control::primitive(&c.eta)).collect();
    let attainable = run.time("attainable cloud", || -> Result<MetricCloud> {
        let feats: Vec<HolderFeatures> = controls
            .par_iter()
            .zip(&primitives)
            .map(|(c, z)| {
                let end = control::endpoint_map(&space, &c.y, z, &u0, &h, cfg.horizon, &solver_cfg)?;
                Ok(features(&end, metric))
            })
            .collect::<Result<_>>()?;
        Ok(MetricCloud::from_features(&feats))
    })?;

    let rel = log_grid(p.rel_eps_hi, p.rel_eps_lo, p.eps_points);
    let (sh, sa) = (scale_of(&holder), scale_of(&attainable));
    let eps_h: Vec<f64> = rel.iter().map(|r| r * sh).collect();
    let eps_a: Vec<f64> = rel.iter().map(|r| r * sa).collect();
    let (pts_h, pts_a) = run.time("packing counts", || (packing_points(&holder, &eps_h), packing_points(&attainable, &eps_a)));

    let cap = p.saturation * n as f64;
    let unsaturated = |q: &EntropyPoint| q.packing >= p.min_packing && q.packing as f64 <= cap;
    let inside: Vec<bool> = pts_h.iter().zip(&pts_a).map(|(a, b)| unsaturated(a) && unsaturated(b)).collect();
    let first = inside.iter().position(|&b| b);
    let last = inside.iter().rposition(|&b| b);
    let window = match (first, last) {
        (Some(lo), Some(hi)) if hi + 1 >= lo + entropy::MIN_FIT_POINTS => Some((lo, hi)),
        _ => None,
    };

    run.write_csv("e2_holder_curve.csv", &CURVE_HEADER, &curve_rows(&pts_h))?;
    run.write_csv("e2_attainable_curve.csv", &CURVE_HEADER, &curve_rows(&pts_a))?;
    let window_rows: Vec<Vec<String>> = (0..rel.len())
        .map(|k| {
            vec![
                k.to_string(),
                rel[k].to_string(),
                eps_h[k].to_string(),
                pts_h[k].packing.to_string(),
                eps_a[k].to_string(),
                pts_a[k].packing.to_string(),
                window.is_some_and(|(lo, hi)| (lo..=hi).contains(&k)).to_string(),
            ]
        })
        .collect();
    run.write_csv(
        "e2_window.csv",
        &["index", "rel_eps", "holder_eps", "holder_packing", "attainable_eps", "attainable_packing", "in_window"],
        &window_rows,
    )?;
    let plot = LogLogPlot {
        title: "Packing counts on the relative ε grid".into(),
        x_label: "ε / median distance".into(),
        y_label: "P(ε)".into(),
        series: vec![
            Series { name: "Hölder ball".into(), points: rel.iter().zip(&pts_h).map(|(r, q)| (*r, q.packing as f64)).collect() },
            Series { name: "attainable".into(), points: rel.iter().zip(&pts_a).map(|(r, q)| (*r, q.packing as f64)).collect() },
        ],
    };
    run.write("e2_entropy.svg", plot.render().as_bytes())?;

    let holder_summary = summarize(&holder, &pts_h, window);
    let attainable_summary = summarize(&attainable, &pts_a, window);
    let gap = match (&holder_summary.window_fit, &attainable_summary.window_fit) {
        (Some(a), Some(b)) => a.slope - b.slope,
        _ => f64::NAN,
    };

    let decade_eps: Vec<f64> = log_grid(DECADE.0, DECADE.1, DECADE.2).iter().map(|r| r * sh).collect();
    let decade_pts = packing_points(&holder, &decade_eps);
    run.write_csv("e2_holder_decade.csv", &CURVE_HEADER, &curve_rows(&decade_pts))?;
    let holder_decade_fit = fit_slope(&decade_pts, FitWindow::default()).ok();
    let expected_holder_slope = 2.0 / (ball.value() - metric.value()) - 0.5;

    let k = n.min(LIPSCHITZ_SUBSET);
    let lipschitz_image = if k >= 2 {
        let cn = space.coefficient_norm(control_norm);
        let norm = |c: &[f64]| cn.eval(c);
        let domain = MetricCloud::from_fn(k, |i, j| {
            relaxation_distance(&controls[i], &controls[j], &primitives[i], &primitives[j], &norm)
        });
        let image = MetricCloud::from_fn(k, |i, j| attainable.distance(i, j));
        let lip = empirical_lipschitz(&domain, &image);
        if lip > 0.0 {
            let eps: Vec<f64> = log_grid(2.0, 0.1, 16).iter().map(|r| r * scale_of(&image)).collect();
            let rep = lipschitz_image_bound(&domain, &image, lip, &eps)?;
            let rows: Vec<Vec<String>> = rep
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.eps.to_string(),
                        r.image_packing.to_string(),
                        r.image_packing_2eps.to_string(),
                        r.domain_packing.to_string(),
                        r.holds.to_string(),
                    ]
                })
                .collect();
            run.write_csv(
                "e2_lipschitz_image.csv",
                &["eps", "image_packing", "image_packing_2eps", "domain_packing", "holds"],
                &rows,
            )?;
            Some(LipschitzImageSummary { samples: k, lipschitz: lip, violations: rep.violations, eps_values: eps.len() })
        } else {
            None
        }
    } else {
        None
    };

    if p.write_matrices {
        let mut buf = Vec::new();
        holder.write_matrix(&mut buf)?;
        run.write("e2_holder_dist.bin", &buf)?;
        buf.clear();
        attainable.write_matrix(&mut buf)?;
        run.write("e2_attainable_dist.bin", &buf)?;
    }

    let mut checks = vec![
        Check::at_least("slope gap (Hölder − attainable) on the matched window", gap, p.target_gap),
        Check::at_least(
            "Hölder slope over one decade",
            holder_decade_fit.as_ref().map_or(f64::NAN, |f| f.slope),
            expected_holder_slope,
        ),
    ];
    if let Some(li) = &lipschitz_image {
        checks.push(Check::at_most("Lipschitz-image violations", li.violations as f64, 0.0));
    }
    let passed = all_passed(&checks);
    let report = E2Report {
        experiment: "E2",
        statement: STATEMENT,
        manifest: crate::manifest::MANIFEST_FILE,
        grid: cfg.grid,
        s: cfg.s,
        gamma: cfg.gamma,
        horizon: cfg.horizon,
        ball_index: ball.value(),
        ball_index_nudged: nudged,
        ball_radius: cfg.radius,
        control_radius: p.m,
        control_norm,
        wave_vectors: p.wave_vectors.clone(),
        metric_index: metric.value(),
        holder: holder_summary,
        attainable: attainable_summary,
        window: MatchedWindow {
            rel_eps_max: p.rel_eps_hi,
            rel_eps_min: p.rel_eps_lo,
            points: window.map_or(0, |(lo, hi)| hi + 1 - lo),
            first_index: window.map(|w| w.0),
            last_index: window.map(|w| w.1),
        },
        gap,
        holder_decade_fit,
        expected_holder_slope,
        lipschitz_image,
        checks,
        passed,
    };
    run.write_json(REPORT_FILE, &report)?;
    let metric_desc = serde_json::json!({
        "index": metric.value(),
        "separations": Separations::Dyadic,
    });
    let manifest = run.finish(
        cfg,
        Some(REPORT_FILE),
        serde_json::json!({
            "statement": STATEMENT,
            "holder_metric": metric_desc,
            "attainable_metric": metric_desc,
            "identical_metric": true,
            "equal_sample_counts": holder.len() == attainable.len(),
        }),
    )?;
    Ok(Outcome { report, manifest, passed })
}
