//! Single solver runs with per-step norms and binary checkpoints.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xlab_core::control::{make_control_space, ControlPath, DEFAULT_WAVE_VECTORS};
use xlab_core::holder::HolderBallSampler;
use xlab_core::solver::{self, diagnostics, ForcingPath, Method, SolverConfig, Triple};
use xlab_core::{holder_norm, io, HolderIndex, TorusGrid, VectorField2D};

use crate::error::{Error, Result};
use crate::manifest::{Run, SeedLineage};
use crate::config::SeedSource;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `(sin x₂, 0)`.
    Shear,
    Zero,
    /// A sample of the Hölder sphere of index `s` and radius `radius`.
    Holder { s: f64, radius: f64, seed: u64, kmax: Option<usize> },
    /// A vector field in the binary field layout.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub grid: usize,
    pub horizon: f64,
    pub dt: f64,
    pub method: Method,
    pub initial: InitialData,
    /// Piecewise-constant control `η` (CSV or JSON), applied as force `Σ η_i e_i`.
    pub control_file: Option<PathBuf>,
    pub wave_vectors: Vec<(i64, i64)>,
    /// Write the velocity of every k-th recorded step.
    pub checkpoint_every: Option<usize>,
    /// Hölder index of the per-step norm.
    pub s: f64,
    pub output: PathBuf,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            horizon: 1.0,
            dt: 0.02,
            method: Method::SemiLagrangian,
            initial: InitialData::Shear,
            control_file: None,
            wave_vectors: DEFAULT_WAVE_VECTORS.to_vec(),
            checkpoint_every: None,
            s: 2.5,
            output: PathBuf::from("xlab-solve"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub sup_norm: f64,
    pub holder_norm: f64,
    pub energy: f64,
    pub enstrophy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub steps: Vec<StepRecord>,
    pub checkpoints: Vec<String>,
    pub energy_drift: f64,
    pub enstrophy_drift: f64,
}

pub const ENDPOINT_FILE: &str = "endpoint.bin";
pub const STEPS_FILE: &str = "steps.csv";

pub fn read_control(path: &Path) -> Result<ControlPath> {
    let file = File::open(path).map_err(|source| Error::File { path: path.into(), source })?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Ok(serde_json::from_reader(reader)?)
    } else {
        Ok(ControlPath::read_csv(reader)?)
    }
}

fn initial_field(init: &InitialData, g: TorusGrid) -> Result<VectorField2D> {
    Ok(match init {
        InitialData::Shear => VectorField2D::from_fn(g, |_, y| (y.sin(), 0.0)),
        InitialData::Zero => VectorField2D::zeros(g),
        InitialData::Holder { s, radius, seed, kmax } => {
            let sampler = HolderBallSampler::new(HolderIndex::new(*s)?, *radius, g);
            let sampler = match kmax {
                Some(k) => sampler.with_kmax(*k),
                None => sampler,
            };
            sampler.sample(g, *seed)
        }
        InitialData::File { path } => {
            let file = File::open(path).map_err(|source| Error::File { path: path.clone(), source })?;
            let u = io::read_vector(&mut BufReader::new(file))?;
            g.check_same(&u.grid())?;
            u
        }
    })
}

pub fn solve(cfg: &SolveConfig) -> Result<SolveSummary> {
    let g = TorusGrid::new(cfg.grid)?;
    let s = HolderIndex::new(cfg.s)?;
    if cfg.checkpoint_every == Some(0) {
        return Err(Error::Config("checkpoint interval must be positive".into()));
    }
    let u0 = initial_field(&cfg.initial, g)?;
    let forcing = match &cfg.control_file {
        None => ForcingPath::zero(),
        Some(path) => {
            let eta = read_control(path)?;
            if (eta.horizon() - cfg.horizon).abs() > 1e-12 * cfg.horizon.max(1.0) {
                return Err(Error::Config(format!(
                    "control horizon {} differs from the run horizon {}",
                    eta.horizon(),
                    cfg.horizon
                )));
            }
            let space = make_control_space(g, &cfg.wave_vectors)?;
            eta.to_forcing(&space)?
        }
    };
    let triple = Triple::unshifted(u0, forcing, cfg.horizon)?;
    let solver_cfg = SolverConfig { dt: cfg.dt, method: cfg.method, ..SolverConfig::new(g) };

    let mut run = Run::create(&cfg.output, "solve")?;
    let traj = run.time("solve", || solver::solve(&triple, &solver_cfg))?;
    let conserved = diagnostics::conserved_quantities(&traj)?;
    let (energy_drift, enstrophy_drift) = diagnostics::relative_drift(&conserved);
    let steps: Vec<StepRecord> = traj
        .velocity
        .iter()
        .zip(&conserved)
        .enumerate()
        .map(|(k, (u, c))| StepRecord {
            step: k,
            t: c.t,
            sup_norm: u.sup_norm(),
            holder_norm: holder_norm(u, s),
            energy: c.energy,
            enstrophy: c.enstrophy,
        })
        .collect();

    let rows: Vec<Vec<String>> = steps
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                r.t.to_string(),
                r.sup_norm.to_string(),
                r.holder_norm.to_string(),
                r.energy.to_string(),
                r.enstrophy.to_string(),
            ]
        })
        .collect();
    run.write_csv(STEPS_FILE, &["step", "t", "sup_norm", "holder_norm", "energy", "enstrophy"], &rows)?;

    let mut buf = Vec::new();
    io::write_field(&mut buf, traj.endpoint())?;
    run.write(ENDPOINT_FILE, &buf)?;
    let mut checkpoints = Vec::new();
    if let Some(every) = cfg.checkpoint_every {
        std::fs::create_dir_all(run.path("checkpoints"))?;
        let last = traj.len() - 1;
        for (k, u) in traj.velocity.iter().enumerate() {
            if k % every == 0 || k == last {
                let name = format!("checkpoints/step_{k:06}.bin");
                buf.clear();
                io::write_field(&mut buf, u)?;
                run.write(&name, &buf)?;
                checkpoints.push(name);
            }
        }
    }

    let summary = SolveSummary { steps, checkpoints, energy_drift, enstrophy_drift };
    let seed = match &cfg.initial {
        InitialData::Holder { seed, .. } => {
            Some(SeedLineage { master: *seed, source: SeedSource::Config, stages: Vec::new() })
        }
        _ => None,
    };
    run.finish_with(
        serde_json::to_value(cfg)?,
        seed,
        None,
        serde_json::json!({
            "time_mesh": summary.steps.iter().map(|r| r.t).collect::<Vec<_>>(),
            "steps": summary.steps,
            "checkpoints": summary.checkpoints,
            "energy_drift": energy_drift,
            "enstrophy_drift": enstrophy_drift,
        }),
    )?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::MANIFEST_FILE;

    #[test]
    fn shear_run_writes_checkpoints() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolveConfig {
            grid: 16,
            horizon: 0.1,
            checkpoint_every: Some(2),
            output: dir.path().into(),
            ..SolveConfig::default()
        };
        let out = solve(&cfg).unwrap();
        assert_eq!(out.steps.len(), 6);
        assert_eq!(out.checkpoints, ["checkpoints/step_000000.bin", "checkpoints/step_000002.bin", "checkpoints/step_000004.bin", "checkpoints/step_000005.bin"]);
        let end = io::read_vector(&mut File::open(dir.path().join(ENDPOINT_FILE)).unwrap()).unwrap();
        let shear = VectorField2D::from_fn(end.grid(), |_, y| (y.sin(), 0.0));
        assert!(end.sup_distance(&shear) < 1e-10);
        assert!(dir.path().join(MANIFEST_FILE).exists());
    }

    #[test]
    fn control_horizon_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eta.json");
        let eta = ControlPath::uniform(2.0, vec![vec![0.0; 6]]).unwrap();
        std::fs::write(&path, serde_json::to_string(&eta).unwrap()).unwrap();
        let cfg = SolveConfig { grid: 16, control_file: Some(path), output: dir.path().into(), ..SolveConfig::default() };
        assert!(matches!(solve(&cfg), Err(Error::Config(_))));
    }
}
