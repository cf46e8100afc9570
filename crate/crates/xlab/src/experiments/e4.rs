//! E4: solver validation against exact solutions, conservation, the second
//! method, the endpoint identity, grid refinement and a boundedness table.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use xlab_core::control::{self, ControlPath, ControlSpace};
use xlab_core::holder::HolderBallSampler;
use xlab_core::solver::{self, diagnostics, resolving_endpoint, ForcingPath, Method, SolverConfig, Triple};
use xlab_core::{holder_norm, rng, HolderIndex, ScalarField2D, TorusGrid, VectorField2D};

use super::{grid, solver_config, Outcome, REPORT_FILE};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::manifest::{num, Run};
use crate::report::{all_passed, Check};
use crate::sampling::{simplex_weights, DatumSampler};
use crate::svg::{LogLogPlot, Series};

pub const DOMAIN_DATA: u64 = 0xE401;
pub const DOMAIN_CONTROLS: u64 = 0xE402;
pub const DOMAIN_BOUNDED: u64 = 0xE403;
pub const EXACT_TOL: f64 = 1e-6;
pub const DRIFT_TOL: f64 = 1e-4;
pub const CROSS_TOL: f64 = 1e-4;
pub const DIVERGENCE_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-4;
pub const MIN_ORDER: f64 = 2.0;
/// Pieces of each random control in the identity check.
pub const IDENTITY_INTERVALS: usize = 8;
/// Pieces of the shift and force of the boundedness data.
pub const BOUNDED_INTERVALS: usize = 4;

fn methods() -> [(Method, &'static str); 2] {
    [(Method::SemiLagrangian, "semi-lagrangian"), (Method::SpectralReference, "spectral")]
}

fn shear(g: TorusGrid) -> VectorField2D {
    VectorField2D::from_fn(g, |_, y| (y.sin(), 0.0))
}

/// Steady shear over `T = 1` and the forced solution `sin t · (sin x₂, 0)`
/// over `T = π/2`, both methods, sup over the recorded mesh.
pub fn exactness_checks(n: usize, dt: f64) -> Result<Vec<Check>> {
    let g = grid(n)?;
    let mut checks = Vec::new();
    for (method, name) in methods() {
        let cfg = solver_config(g, dt).with_method(method);
        let tr = Triple::unshifted(shear(g), ForcingPath::zero(), 1.0)?;
        let traj = solver::solve(&tr, &cfg)?;
        let err = traj.velocity.iter().map(|u| u.sup_distance(&shear(g))).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("steady shear C0 error ({name}, {n}²)"), err, EXACT_TOL));

        let f = ForcingPath::separable(shear(g), f64::cos, f64::sin);
        let tr = Triple::unshifted(VectorField2D::zeros(g), f, FRAC_PI_2)?;
        let traj = solver::solve(&tr, &cfg)?;
        let err = traj
            .times
            .iter()
            .zip(&traj.velocity)
            .map(|(t, u)| u.sup_distance(&shear(g).scale(t.sin())))
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("forced solution C0 error ({name}, {n}²)"), err, EXACT_TOL));
    }
    Ok(checks)
}

fn random_data(g: TorusGrid, s: HolderIndex, radius: f64, kmax: Option<usize>, seed: u64) -> VectorField2D {
    let sampler = HolderBallSampler::new(s, radius, g);
    match kmax {
        Some(k) => sampler.with_kmax(k),
        None => sampler,
    }
    .sample(g, seed)
}

/// Energy and enstrophy drift of both methods and their endpoint gap, on
/// full-band data of the Hölder sphere.
pub fn conservation_checks(n: usize, s: HolderIndex, radius: f64, seed: u64, dt: f64) -> Result<Vec<Check>> {
    let g = grid(n)?;
    let u0 = random_data(g, s, radius, None, rng::sub_seed(seed, DOMAIN_DATA, 0));
    let tr = Triple::unshifted(u0, ForcingPath::zero(), 1.0)?;
    let mut checks = Vec::new();
    let mut ends = Vec::new();
    for (method, name) in methods() {
        let traj = solver::solve(&tr, &solver_config(g, dt).with_method(method))?;
        let (de, dz) = diagnostics::relative_drift(&diagnostics::conserved_quantities(&traj)?);
        checks.push(Check::at_most(format!("energy drift ({name}, {n}²)"), de, DRIFT_TOL));
        checks.push(Check::at_most(format!("enstrophy drift ({name}, {n}²)"), dz, DRIFT_TOL));
        let end = traj.endpoint().clone();
        checks.push(Check::at_most(
            format!("relative endpoint divergence ({name}, {n}²)"),
            end.max_divergence() / end.sup_norm(),
            DIVERGENCE_TOL,
        ));
        ends.push(end);
    }
    checks.push(Check::at_most(format!("cross-method endpoint C0 gap ({n}²)"), ends[0].sup_distance(&ends[1]), CROSS_TOL));
    Ok(checks)
}

/// `max ‖R_T(u₀, h + η) − (z(T) + S_T(z))‖_{C⁰}` over random piecewise-constant controls.
pub fn identity_check(n: usize, count: usize, seed: u64, dt: f64) -> Result<Check> {
    let g = grid(n)?;
    let space = ControlSpace::default_space(g);
    let cfg = solver_config(g, dt);
    let s = HolderIndex::new(2.5).expect("non-integer");
    let u0 = random_data(g, s, 1.0, Some(6), rng::sub_seed(seed, DOMAIN_CONTROLS, u64::MAX));
    let h = ForcingPath::zero();
    let errs: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut r = rng::stream(seed, DOMAIN_CONTROLS, i);
            let coeffs = (0..IDENTITY_INTERVALS)
                .map(|_| (0..space.dim()).map(|_| r.random_range(-1.0..1.0)).collect())
                .collect();
            let eta = ControlPath::uniform(1.0, coeffs)?;
            let z = control::primitive(&eta);
            let lhs = resolving_endpoint(&u0, &h.plus(&eta.to_forcing(&space)?), 1.0, &cfg)?;
            let rhs = control::endpoint_map(&space, z.end(), &z, &u0, &h, 1.0, &cfg)?;
            Ok(lhs.sup_distance(&rhs))
        })
        .collect::<Result<_>>()?;
    Ok(Check::at_most(
        format!("endpoint identity C0 error ({count} controls, {n}²)"),
        errs.into_iter().fold(0.0, f64::max),
        IDENTITY_TOL,
    ))
}

/// Values of a field at the points of a coarser grid dividing it.
pub fn restrict(u: &VectorField2D, coarse: TorusGrid) -> VectorField2D {
    let n = coarse.n();
    let r = u.grid().n() / n;
    let fine = u.grid().n();
    let pick = |v: &[f64]| -> Vec<f64> { (0..n * n).map(|k| v[(r * (k / n)) * fine + r * (k % n)]).collect() };
    VectorField2D::new(
        ScalarField2D::from_values(coarse, pick(u.u1().values())).expect("shape"),
        ScalarField2D::from_values(coarse, pick(u.u2().values())).expect("shape"),
    )
    .expect("same grid")
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub coarse: usize,
    pub fine: usize,
    pub difference: f64,
}

/// Successive C⁰ differences of the endpoint on refined grids, from
/// band-limited data sampled on the finest grid and restricted exactly.
pub fn convergence(
    grids: &[usize],
    kmax: usize,
    s: HolderIndex,
    radius: f64,
    seed: u64,
    dt: f64,
) -> Result<(Vec<ConvergenceRow>, Check)> {
    let finest = grid(*grids.iter().max().expect("non-empty grid list"))?;
    let u_fine = random_data(finest, s, radius, Some(kmax), rng::sub_seed(seed, DOMAIN_DATA, 1));
    let ends: Vec<(TorusGrid, VectorField2D)> = grids
        .iter()
        .map(|&n| -> Result<_> {
            let g = grid(n)?;
            let tr = Triple::unshifted(restrict(&u_fine, g), ForcingPath::zero(), 1.0)?;
            let end = resolving_endpoint(&tr.u0, &tr.f, 1.0, &solver_config(g, dt))?;
            Ok((g, end))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ConvergenceRow> = ends
        .windows(2)
        .map(|w| ConvergenceRow {
            coarse: w[0].0.n(),
            fine: w[1].0.n(),
            difference: restrict(&w[1].1, w[0].0).sup_distance(&w[0].1),
        })
        .collect();
    let order = rows.windows(2).map(|w| (w[0].difference / w[1].difference).log2()).fold(f64::INFINITY, f64::min);
    let label = grids.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("/");
    Ok((rows, Check::at_least(format!("convergence order from grids {label}"), order, MIN_ORDER)))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundedRow {
    pub sample: usize,
    pub d_norm: f64,
    pub max_cs_norm: f64,
    pub status: String,
}

/// `max_t ‖u(t)‖_{C^s}` for data sampled on the `D_T` sphere of radius `radius`.
pub fn boundedness(cfg: &ExperimentConfig, count: usize, dt: f64) -> Result<Vec<BoundedRow>> {
    let g = grid(cfg.grid)?;
    let s = cfg.index_s();
    let sampler = DatumSampler::new(g, s, BOUNDED_INTERVALS, cfg.horizon);
    let solver_cfg: SolverConfig = solver_config(g, dt);
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(cfg.seed, DOMAIN_BOUNDED, i as u64);
            let w = simplex_weights(&mut r);
            let d = sampler.sample(cfg.radius, w, &mut r);
            let out = d.triple().and_then(|tr| Ok((tr.d_norm(s), solver::solve(&tr, &solver_cfg)?)));
            match out {
                Ok((d_norm, traj)) => BoundedRow {
                    sample: i,
                    d_norm,
                    max_cs_norm: traj.velocity.iter().map(|u| holder_norm(u, s)).fold(0.0, f64::max),
                    status: "ok".into(),
                },
                Err(e) => BoundedRow { sample: i, d_norm: f64::NAN, max_cs_norm: f64::NAN, status: e.to_string() },
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct E4Report {
    pub experiment: &'static str,
    pub manifest: &'static str,
    pub convergence: Vec<ConvergenceRow>,
    pub bounded: Vec<BoundedRow>,
    pub bounded_max_cs_norm: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome<E4Report>> {
    let p = &cfg.e4;
    let s = cfg.index_s();
    let mut run = Run::create(&cfg.output, "E4")?;
    run.seed_stage("random initial data", DOMAIN_DATA);
    run.seed_stage("random controls", DOMAIN_CONTROLS);
    run.seed_stage("bounded data", DOMAIN_BOUNDED);

    let mut checks = run.time("exact solutions", || exactness_checks(p.exact_grid, p.dt))?;
    checks.extend(run.time("conservation and cross-method", || {
        conservation_checks(p.conservation_grid, s, cfg.radius, cfg.seed, p.dt)
    })?);
    if p.cross_grid != p.conservation_grid {
        let extra = run.time("cross-method", || conservation_checks(p.cross_grid, s, cfg.radius, cfg.seed, p.dt))?;
        checks.extend(extra.into_iter().filter(|c| c.name.starts_with("cross-method")));
    }
    checks.push(run.time("endpoint identity", || identity_check(p.identity_grid, p.identity_controls, cfg.seed, p.dt))?);
    let (conv, conv_check) = run.time("grid convergence", || {
        convergence(&p.convergence_grids, p.convergence_kmax, s, cfg.radius, cfg.seed, p.dt)
    })?;
    checks.push(conv_check);
    let bounded = run.time("boundedness", || boundedness(cfg, p.bounded_samples, p.dt))?;
    let bounded_failures = bounded.iter().filter(|b| b.status != "ok").count();
    let bounded_max = bounded.iter().map(|b| b.max_cs_norm).fold(0.0, f64::max);
    checks.push(Check::at_most("boundedness runs that failed", bounded_failures as f64, 0.0));

    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![c.name.clone(), num(c.value), c.threshold.to_string(), c.passed.to_string()])
        .collect();
    run.write_csv("e4_checks.csv", &["check", "value", "threshold", "passed"], &rows)?;
    let rows: Vec<Vec<String>> = conv
        .iter()
        .map(|r| vec![r.coarse.to_string(), r.fine.to_string(), num(r.difference)])
        .collect();
    run.write_csv("e4_convergence.csv", &["coarse", "fine", "difference"], &rows)?;
    let rows: Vec<Vec<String>> = bounded
        .iter()
        .map(|b| vec![b.sample.to_string(), num(b.d_norm), num(b.max_cs_norm), b.status.clone()])
        .collect();
    run.write_csv("e4_boundedness.csv", &["sample", "d_norm", "max_cs_norm", "status"], &rows)?;
    let plot = LogLogPlot {
        title: "Endpoint difference under refinement".into(),
        x_label: "coarse grid".into(),
        y_label: "C0 difference".into(),
        series: vec![Series {
            name: "semi-lagrangian".into(),
            points: conv.iter().map(|r| (r.coarse as f64, r.difference)).collect(),
        }],
    };
    run.write("e4_convergence.svg", plot.render().as_bytes())?;

    let passed = all_passed(&checks);
    let report = E4Report {
        experiment: "E4",
        manifest: crate::manifest::MANIFEST_FILE,
        convergence: conv,
        bounded,
        bounded_max_cs_norm: bounded_max,
        checks,
        passed,
    };
    run.write_json(REPORT_FILE, &report)?;
    let manifest = run.finish(cfg, Some(REPORT_FILE), serde_json::Value::Null)?;
    Ok(Outcome { report, manifest, passed })
}
