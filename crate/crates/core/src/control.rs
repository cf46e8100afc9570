//! Finite-dimensional control spaces, piecewise-constant control paths and
//! the endpoint map `K(y, z) = y + S_T(z)`.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField2D;
use crate::grid::TorusGrid;
use crate::holder::{HolderFeatures, HolderIndex, Separations};
use crate::solver::{self, FieldPath, ForcingPath, SolverConfig, Triple};

/// Wave vectors of the default six-dimensional space.
pub const DEFAULT_WAVE_VECTORS: [(i64, i64); 3] = [(1, 0), (0, 1), (1, 1)];

/// Smallest admissible Gram determinant of the normalised basis.
pub const GRAM_DET_TOL: f64 = 1e-12;

/// Norm applied to fields of the control space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "s")]
pub enum FieldNorm {
    C0,
    L2,
    Holder(HolderIndex),
}

impl FieldNorm {
    pub fn eval(&self, u: &VectorField2D) -> f64 {
        match self {
            FieldNorm::C0 => u.sup_norm(),
            FieldNorm::L2 => u.l2_inner(u).max(0.0).sqrt(),
            FieldNorm::Holder(s) => crate::holder::holder_norm(u, *s),
        }
    }
}

/// Span of `{∇⊥cos(k·x), ∇⊥sin(k·x)}` over a list of wave vectors.
#[derive(Clone, Debug)]
pub struct ControlSpace {
    grid: TorusGrid,
    wave_vectors: Vec<(i64, i64)>,
    basis: Vec<VectorField2D>,
    gram: DMatrix<f64>,
}

/// Builds the control space spanned by `∇⊥cos(k·x)` and `∇⊥sin(k·x)`, `k ∈ spec`.
pub fn make_control_space(grid: TorusGrid, spec: &[(i64, i64)]) -> Result<ControlSpace> {
    if spec.is_empty() {
        return Err(Error::DegenerateBasis("empty wave-vector list".into()));
    }
    let limit = (grid.n() / 2) as i64;
    let mut canonical = Vec::new();
    for &(k1, k2) in spec {
        if (k1, k2) == (0, 0) {
            return Err(Error::InvalidInput("zero wave vector".into()));
        }
        if k1.abs() >= limit || k2.abs() >= limit {
            return Err(Error::InvalidInput(format!("wave vector ({k1}, {k2}) not resolved on {} points", grid.n())));
        }
        // k and −k span the same pair of fields.
        let c = if k1 < 0 || (k1 == 0 && k2 < 0) { (-k1, -k2) } else { (k1, k2) };
        if canonical.contains(&c) {
            return Err(Error::DegenerateBasis(format!("duplicate wave vector ({k1}, {k2})")));
        }
        canonical.push(c);
    }

    let mut basis = Vec::with_capacity(2 * spec.len());
    for &(k1, k2) in spec {
        let (a, b) = (k1 as f64, k2 as f64);
        // ∇⊥cos(k·x) = (k₂ sin, −k₁ sin), ∇⊥sin(k·x) = (−k₂ cos, k₁ cos)
        basis.push(VectorField2D::from_fn(grid, |x, y| {
            let s = (a * x + b * y).sin();
            (b * s, -a * s)
        }));
        basis.push(VectorField2D::from_fn(grid, |x, y| {
            let c = (a * x + b * y).cos();
            (-b * c, a * c)
        }));
    }
    let dim = basis.len();
    let gram = DMatrix::from_fn(dim, dim, |i, j| basis[i].l2_inner(&basis[j]));
    let scale = DMatrix::from_fn(dim, dim, |i, j| 1.0 / (gram[(i, i)] * gram[(j, j)]).sqrt());
    let det = gram.component_mul(&scale).determinant();
    if !(det > GRAM_DET_TOL) {
        return Err(Error::DegenerateBasis(format!("normalised Gram determinant {det:e}")));
    }
    Ok(ControlSpace { grid, wave_vectors: spec.to_vec(), basis, gram })
}

impl ControlSpace {
    /// The default six-dimensional low-mode space.
    pub fn default_space(grid: TorusGrid) -> Self {
        make_control_space(grid, &DEFAULT_WAVE_VECTORS).expect("default wave vectors are valid")
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn wave_vectors(&self) -> &[(i64, i64)] {
        &self.wave_vectors
    }

    pub fn basis(&self) -> &[VectorField2D] {
        &self.basis
    }

    /// `L²` Gram matrix of the basis.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `Σ cᵢ eᵢ`.
    pub fn field(&self, coeffs: &[f64]) -> VectorField2D {
        assert_eq!(coeffs.len(), self.dim(), "coefficient length");
        VectorField2D::combination(coeffs, &self.basis)
    }

    /// Coefficients of the `L²`-orthogonal projection of `u` onto the space.
    pub fn coefficients(&self, u: &VectorField2D) -> Vec<f64> {
        let rhs = nalgebra::DVector::from_iterator(self.dim(), self.basis.iter().map(|e| e.l2_inner(u)));
        let chol = self.gram.clone().cholesky().expect("Gram matrix is positive definite");
        chol.solve(&rhs).iter().copied().collect()
    }

    /// Norm evaluator on coefficient vectors.
    pub fn coefficient_norm(&self, norm: FieldNorm) -> CoefficientNorm<'_> {
        let features = match norm {
            FieldNorm::Holder(s) => self.basis.iter().map(|e| HolderFeatures::new(e, s, Separations::Dyadic)).collect(),
            _ => Vec::new(),
        };
        CoefficientNorm { space: self, norm, features }
    }
}

/// `c ↦ ‖Σ cᵢ eᵢ‖` with per-basis precomputation.
pub struct CoefficientNorm<'a> {
    space: &'a ControlSpace,
    norm: FieldNorm,
    features: Vec<HolderFeatures>,
}

impl CoefficientNorm<'_> {
    pub fn eval(&self, c: &[f64]) -> f64 {
        if c.iter().all(|&x| x == 0.0) {
            return 0.0;
        }
        match self.norm {
            FieldNorm::Holder(_) => HolderFeatures::combination(c, &self.features).norm(),
            FieldNorm::L2 => {
                let v = nalgebra::DVector::from_column_slice(c);
                (v.transpose() * &self.space.gram * &v)[(0, 0)].max(0.0).sqrt()
            }
            FieldNorm::C0 => self.space.field(c).sup_norm(),
        }
    }
}

/// Piecewise-constant control `η(t) = Σᵢ c_{k,i} eᵢ` on `[t_{k−1}, t_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    breakpoints: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl ControlPath {
    pub fn new(breakpoints: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 {
            return Err(Error::InvalidInput("breakpoints must start at 0 and contain an interval".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        if coeffs.len() != breakpoints.len() - 1 {
            return Err(Error::ShapeMismatch { expected: breakpoints.len() - 1, actual: coeffs.len() });
        }
        let dim = coeffs[0].len();
        if let Some(c) = coeffs.iter().find(|c| c.len() != dim) {
            return Err(Error::ShapeMismatch { expected: dim, actual: c.len() });
        }
        Ok(Self { breakpoints, coeffs })
    }

    /// Equal intervals on `[0, horizon]`.
    pub fn uniform(horizon: f64, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let l = coeffs.len();
        let breakpoints = (0..=l).map(|k| horizon * k as f64 / l as f64).collect();
        Self::new(breakpoints, coeffs)
    }

    pub fn zero(horizon: f64, intervals: usize, dim: usize) -> Self {
        Self::uniform(horizon, vec![vec![0.0; dim]; intervals.max(1)]).expect("valid zero path")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn intervals(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn scaled(&self, a: f64) -> ControlPath {
        self.combine(a, self, 0.0)
    }

    /// `a·self + b·other` on a common breakpoint set.
    pub fn combine(&self, a: f64, other: &ControlPath, b: f64) -> ControlPath {
        assert_eq!(self.breakpoints, other.breakpoints, "breakpoint mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        ControlPath { breakpoints: self.breakpoints.clone(), coeffs }
    }

    /// `Σ_k |I_k| ‖η_k‖`.
    pub fn l1_norm(&self, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
        self.breakpoints.windows(2).zip(&self.coeffs).map(|(w, c)| (w[1] - w[0]) * norm(c)).sum()
    }

    /// The control as a forcing path of the solver.
    pub fn to_forcing(&self, space: &ControlSpace) -> Result<ForcingPath> {
        self.check_dim(space)?;
        ForcingPath::piecewise_constant(&self.breakpoints, self.coeffs.iter().map(|c| space.field(c)).collect())
    }

    fn check_dim(&self, space: &ControlSpace) -> Result<()> {
        if self.dim() != space.dim() {
            return Err(Error::ShapeMismatch { expected: space.dim(), actual: self.dim() });
        }
        Ok(())
    }

    /// CSV with header `interval,t_start,t_end,c_1,…,c_n`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["interval".to_string(), "t_start".into(), "t_end".into()];
        header.extend((1..=self.dim()).map(|i| format!("c_{i}")));
        out.write_record(&header)?;
        for (k, c) in self.coeffs.iter().enumerate() {
            let mut row = vec![k.to_string(), self.breakpoints[k].to_string(), self.breakpoints[k + 1].to_string()];
            row.extend(c.iter().map(|x| x.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut breakpoints = vec![];
        let mut coeffs = vec![];
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::InvalidInput(format!("row {k}: missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("row {k}: {e}")))
            };
            if parse(0)? as usize != k {
                return Err(Error::InvalidInput(format!("row {k}: interval index out of order")));
            }
            let (t0, t1) = (parse(1)?, parse(2)?);
            match breakpoints.last() {
                None => breakpoints.push(t0),
                Some(&prev) if prev != t0 => {
                    return Err(Error::InvalidInput(format!("row {k}: t_start {t0} does not continue {prev}")))
                }
                _ => {}
            }
            breakpoints.push(t1);
            coeffs.push((3..rec.len()).map(parse).collect::<Result<Vec<f64>>>()?);
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("empty control file".into()));
        }
        Self::new(breakpoints, coeffs)
    }
}

/// Primitive `z(t) = ∫₀ᵗ η`: continuous and piecewise linear, stored by nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitivePath {
    times: Vec<f64>,
    nodes: Vec<Vec<f64>>,
}

/// Exact interval-wise integration of a piecewise-constant control.
pub fn primitive(eta: &ControlPath) -> PrimitivePath {
    let mut nodes = Vec::with_capacity(eta.intervals() + 1);
    nodes.push(vec![0.0; eta.dim()]);
    for (w, c) in eta.breakpoints.windows(2).zip(&eta.coeffs) {
        let dt = w[1] - w[0];
        let prev = nodes.last().unwrap();
        let next = prev.iter().zip(c).map(|(z, e)| z + dt * e).collect();
        nodes.push(next);
    }
    PrimitivePath { times: eta.breakpoints.clone(), nodes }
}

impl PrimitivePath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// `z(T)`.
    pub fn end(&self) -> &[f64] {
        self.nodes.last().unwrap()
    }

    /// Coefficients of `z(t)`, linear between nodes and constant outside.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.nodes[0].clone();
        }
        if k == self.times.len() {
            return self.end().to_vec();
        }
        let (a, b) = (self.times[k - 1], self.times[k]);
        let th = (t - a) / (b - a);
        self.nodes[k - 1].iter().zip(&self.nodes[k]).map(|(p, q)| (1.0 - th) * p + th * q).collect()
    }

    /// The primitive as a field path for the solver.
    pub fn to_field_path(&self, space: &ControlSpace) -> Result<FieldPath> {
        if self.nodes[0].len() != space.dim() {
            return Err(Error::ShapeMismatch { expected: space.dim(), actual: self.nodes[0].len() });
        }
        FieldPath::new(self.times.clone(), self.nodes.iter().map(|c| space.field(c)).collect())
    }

    /// `∫ ‖z‖ dt` by the trapezoid rule over nodes. Norms are convex, so this
    /// is an upper bound for the exact integral, with equality when `z` keeps a
    /// fixed direction on each interval.
    pub fn l1_norm(&self, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
        let v: Vec<f64> = self.nodes.iter().map(|c| norm(c)).collect();
        self.times.windows(2).zip(v.windows(2)).map(|(t, n)| 0.5 * (t[1] - t[0]) * (n[0] + n[1])).sum()
    }
}

/// `sup_t ‖z(t)‖`, attained at a node of the piecewise-linear primitive.
pub fn relaxation_norm(eta: &ControlPath, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
    primitive(eta).nodes.iter().map(|c| norm(c)).fold(0.0, f64::max)
}

/// `K(y, z) = y + S_T(z)`, where `S_T(z) = v(T)` for the solution `v` of the
/// Euler-type system shifted by `z` with force `h` and `v(0) = u₀`.
pub fn endpoint_map(
    space: &ControlSpace,
    y: &[f64],
    z: &PrimitivePath,
    u0: &VectorField2D,
    h: &ForcingPath,
    horizon: f64,
    config: &SolverConfig,
) -> Result<VectorField2D> {
    if y.len() != space.dim() {
        return Err(Error::ShapeMismatch { expected: space.dim(), actual: y.len() });
    }
    let triple = Triple::new(u0.clone(), Some(z.to_field_path(space)?), h.clone(), horizon)?;
    let config = SolverConfig { record_every: usize::MAX, pressure: false, ..config.clone() };
    let traj = solver::solve(&triple, &config)?;
    Ok(&space.field(y) + traj.endpoint())
}

/// A point `(y, η)` of `E × W^{1,1}(J, E)`, with `z` the primitive of `η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmSample {
    pub y: Vec<f64>,
    pub eta: ControlPath,
}

impl BmSample {
    /// `‖y‖ + ‖z‖_{L¹} + ‖η‖_{L¹}`: the `E`-norm of `y` plus the `W^{1,1}`
    /// norm of the primitive, with `‖z‖_{L¹}` from [`PrimitivePath::l1_norm`].
    pub fn composite_norm(&self, norm: &dyn Fn(&[f64]) -> f64) -> f64 {
        norm(&self.y) + primitive(&self.eta).l1_norm(norm) + self.eta.l1_norm(norm)
    }

    fn scaled(&self, a: f64) -> BmSample {
        BmSample { y: self.y.iter().map(|v| a * v).collect(), eta: self.eta.scaled(a) }
    }
}

/// Random points of the ball `B_m` of radius `m` in the composite norm.
///
/// A standard Gaussian vector in the `dim·(1 + L)` coefficients fixes the
/// direction, and the radius is `m·U^{1/D}` with `U` uniform, so the radial
/// law matches the uniform law on a ball of dimension `D`.
pub fn sample_bm(
    space: &ControlSpace,
    norm: FieldNorm,
    m: f64,
    count: usize,
    seed: u64,
    intervals: usize,
    horizon: f64,
) -> Vec<BmSample> {
    let cn = space.coefficient_norm(norm);
    let f = |c: &[f64]| cn.eval(c);
    let dim = space.dim();
    let total = (dim * (1 + intervals)) as f64;
    (0..count as u64)
        .map(|i| {
            let mut rng = crate::rng::stream(seed, 0xB0, i);
            let mut gauss = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect() };
            let y = gauss(dim);
            let coeffs = (0..intervals).map(|_| gauss(dim)).collect();
            let u: f64 = rng.random();
            let raw = BmSample { y, eta: ControlPath::uniform(horizon, coeffs).expect("valid uniform path") };
            let r = raw.composite_norm(&f);
            let target = m * u.powf(1.0 / total);
            if r > 0.0 && m > 0.0 {
                raw.scaled(target / r)
            } else {
                raw.scaled(0.0)
            }
        })
        .collect()
}
