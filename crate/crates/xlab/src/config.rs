//! Experiment configuration: one JSON document, every field optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xlab_core::HolderIndex;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
}

/// Where the master seed came from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    #[default]
    Default,
    Config,
    Env,
    Flag,
}

pub const SEED_ENV: &str = "XLAB_SEED";
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    /// Grid points per axis.
    pub grid: usize,
    /// Regularity index `s` of the data space.
    pub s: f64,
    /// Extra regularity `γ` of the Hölder ball compared in E2.
    pub gamma: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Radius of the sampled data ball.
    pub radius: f64,
    /// Main sample count (experiment-specific default when absent).
    pub samples: Option<usize>,
    /// Descending ε grid (experiment-specific default when absent).
    pub eps: Option<Vec<f64>>,
    pub seed: u64,
    #[serde(skip_serializing_if = "is_default_source")]
    pub seed_source: SeedSource,
    pub output: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub e1: E1Params,
    pub e2: E2Params,
    pub e3: E3Params,
    pub e4: E4Params,
}

fn is_default_source(s: &SeedSource) -> bool {
    *s == SeedSource::Default
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            grid: 32,
            s: 2.5,
            gamma: 0.5,
            horizon: 1.0,
            radius: 1.0,
            samples: None,
            eps: None,
            seed: DEFAULT_SEED,
            seed_source: SeedSource::Default,
            output: PathBuf::from("xlab-out"),
            workers: 0,
            e1: E1Params::default(),
            e2: E2Params::default(),
            e3: E3Params::default(),
            e4: E4Params::default(),
        }
    }
}

/// Which part of the datum is perturbed in E1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    #[default]
    All,
    ForceOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E1Params {
    /// Perturbation magnitudes, largest first.
    pub scales: Vec<f64>,
    pub perturbation: Perturbation,
    /// Piecewise-constant intervals of the sampled shift and force.
    pub intervals: usize,
    pub dt: f64,
    /// Allowed growth of the max ratio from one scale to the next smaller one.
    pub growth_tolerance: f64,
    /// Minimum number of successful pairs over all scales.
    pub min_pairs: usize,
}

impl Default for E1Params {
    fn default() -> Self {
        Self { scales: vec![1e-1, 1e-2, 1e-3], perturbation: Perturbation::All, intervals: 4, dt: 0.02, growth_tolerance: 0.2, min_pairs: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E2Params {
    /// Radius `m` of the control ball `B_m`.
    pub m: f64,
    /// Piecewise-constant intervals of each control.
    pub intervals: usize,
    /// Wave vectors spanning the control space.
    pub wave_vectors: Vec<(i64, i64)>,
    /// Seed of a Hölder-ball sample used as `u₀`; `None` means `u₀ = 0`.
    pub u0_seed: Option<u64>,
    /// Relative ε grid `[hi, lo]` (multiples of each cloud's median distance).
    pub rel_eps_hi: f64,
    pub rel_eps_lo: f64,
    pub eps_points: usize,
    /// A count is saturated once `P(ε) > saturation · N`.
    pub saturation: f64,
    /// Counts below this are saturated at the large-ε end.
    pub min_packing: usize,
    /// Required slope gap.
    pub target_gap: f64,
    pub dt: f64,
    /// Also write both distance matrices in the binary field layout.
    pub write_matrices: bool,
}

impl Default for E2Params {
    fn default() -> Self {
        Self {
            m: 1.0,
            intervals: 16,
            wave_vectors: xlab_core::control::DEFAULT_WAVE_VECTORS.to_vec(),
            u0_seed: None,
            rel_eps_hi: 2.0,
            rel_eps_lo: 0.1,
            eps_points: 32,
            saturation: 0.25,
            min_packing: 2,
            target_gap: 0.3,
            dt: 0.02,
            write_matrices: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E3Params {
    /// `(R, ε)` pairs of the Monte-Carlo check.
    pub cases: Vec<(f64, f64)>,
    /// Maximum number of linear pieces of a sampled function.
    pub max_pieces: usize,
    /// Radii of the cardinality table.
    pub table_radii: Vec<f64>,
    /// Bound `C_R = growth_constant · R` on `ln|net| / (ε⁻¹ ln ε⁻¹)`.
    pub growth_constant: f64,
}

impl Default for E3Params {
    fn default() -> Self {
        Self {
            cases: vec![(1.0, 0.5), (1.0, 0.1), (2.0, 0.2)],
            max_pieces: 40,
            table_radii: vec![1.0, 2.0],
            growth_constant: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct E4Params {
    pub exact_grid: usize,
    pub conservation_grid: usize,
    pub cross_grid: usize,
    pub identity_grid: usize,
    pub identity_controls: usize,
    pub convergence_grids: Vec<usize>,
    /// Band limit of the convergence data.
    pub convergence_kmax: usize,
    pub bounded_samples: usize,
    pub dt: f64,
}

impl Default for E4Params {
    fn default() -> Self {
        Self {
            exact_grid: 64,
            conservation_grid: 128,
            cross_grid: 128,
            identity_grid: 128,
            identity_controls: 20,
            convergence_grids: vec![64, 128, 256],
            convergence_kmax: 4,
            bounded_samples: 8,
            dt: 0.02,
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(id: ExperimentId) -> Self {
        Self { experiment: Some(id), ..Self::default() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.into(), source })?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        cfg.seed_source = SeedSource::Config;
        Ok(cfg)
    }

    /// Applies `XLAB_SEED` if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={v} is not an integer")))?;
            self.seed_source = SeedSource::Env;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.s > 2.0) || self.s.fract() == 0.0 {
            return bad(format!("s must be a non-integer above 2, got {}", self.s));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("γ must lie in [0, 1), got {}", self.gamma));
        }
        if xlab_core::TorusGrid::new(self.grid).is_err() {
            return bad(format!("grid {} must be a power of two ≥ 8", self.grid));
        }
        if !(self.horizon > 0.0) || !(self.radius > 0.0) {
            return bad("horizon and radius must be positive".into());
        }
        if let Some(eps) = &self.eps {
            if eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(*e > 0.0)) {
                return bad("ε grid must be positive and strictly descending".into());
            }
        }
        if self.e1.scales.is_empty() || self.e1.scales.iter().any(|v| !(*v > 0.0)) {
            return bad("E1 scales must be positive and non-empty".into());
        }
        if self.e1.scales.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("E1 scales must be strictly descending".into());
        }
        Ok(())
    }

    pub fn index_s(&self) -> HolderIndex {
        HolderIndex::new(self.s).expect("validated s")
    }

    /// `C^{s−1}`, the metric of E1 and E2.
    pub fn index_s_minus_one(&self) -> HolderIndex {
        HolderIndex::new(self.s - 1.0).expect("validated s")
    }

    /// Regularity of the E2 Hölder ball: `s + γ`, moved to `s + γ − 0.01`
    /// when that is an integer.
    pub fn ball_index(&self) -> (HolderIndex, bool) {
        let v = self.s + self.gamma;
        if (v - v.round()).abs() < 1e-9 {
            (HolderIndex::new(v - 0.01).expect("non-integer"), true)
        } else {
            (HolderIndex::new(v).expect("non-integer"), false)
        }
    }
}
