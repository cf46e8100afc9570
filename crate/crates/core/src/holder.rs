//! Discrete Hölder norms `‖u‖_s` and random samples from Hölder balls.
//!
//! The norm is `max_{|α|≤[s]} sup|∂^α u| + max_{|α|=[s]} sup |∂^α u(x) − ∂^α u(y)| / |x−y|^γ`
//! with spectral derivatives and the quotient evaluated on axis-aligned grid
//! pairs. With [`Separations::Dyadic`] only separations `h·2^j`,
//! `j = 0..log₂(n/2)`, are used, so the quotient is a lower estimate of the
//! continuum supremum.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldLike, ScalarField2D, VectorField2D};
use crate::grid::TorusGrid;
use crate::spectral;

/// A positive non-integer smoothness order `s = [s] + γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HolderIndex {
    s: f64,
}

impl HolderIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveOrder(s));
        }
        if s.fract() == 0.0 {
            return Err(Error::IntegerOrder(s));
        }
        Ok(Self { s })
    }

    pub fn value(&self) -> f64 {
        self.s
    }

    /// `[s]`.
    pub fn integer_part(&self) -> u32 {
        self.s.floor() as u32
    }

    /// `γ = s − [s]`.
    pub fn fraction(&self) -> f64 {
        self.s - self.s.floor()
    }
}

impl TryFrom<f64> for HolderIndex {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<HolderIndex> for f64 {
    fn from(h: HolderIndex) -> f64 {
        h.s
    }
}

/// Which axis-aligned separations enter the Hölder quotient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separations {
    /// `h·2^j` for `j = 0..=log₂(n/2)`.
    #[default]
    Dyadic,
    /// Every grid offset `1..=n/2`.
    Exhaustive,
}

impl Separations {
    pub fn offsets(&self, n: usize) -> Vec<usize> {
        match self {
            Separations::Dyadic => {
                let mut v = Vec::new();
                let mut d = 1;
                while d <= n / 2 {
                    v.push(d);
                    d *= 2;
                }
                v
            }
            Separations::Exhaustive => (1..=n / 2).collect(),
        }
    }
}

/// All multi-indices `(a, b)` with `a + b = order`.
fn multi_indices(order: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..=order).rev().map(move |a| (a, order - a))
}

/// Precomputed derivatives `∂^α u`, `|α| ≤ [s]`, of one field. The
/// distance between two feature sets is the discrete `C^s` norm of the
/// difference of the underlying fields, so norms and metric clouds share
/// one code path.
#[derive(Clone, Debug)]
pub struct HolderFeatures {
    grid: TorusGrid,
    index: HolderIndex,
    separations: Separations,
    comps: usize,
    /// One block of `comps · n²` values per multi-index, ordered by `|α|`.
    stacks: Vec<Vec<f64>>,
    top_start: usize,
}

impl HolderFeatures {
    pub fn new<F: FieldLike + ?Sized>(field: &F, index: HolderIndex, separations: Separations) -> Self {
        let grid = field.grid();
        let comps = field.components();
        let order = index.integer_part();
        let mut stacks = Vec::new();
        let mut top_start = 0;
        for k in 0..=order {
            if k == order {
                top_start = stacks.len();
            }
            for (a, b) in multi_indices(k) {
                let mut block = Vec::with_capacity(comps.len() * grid.len());
                for c in &comps {
                    if a == 0 && b == 0 {
                        block.extend_from_slice(c.values());
                    } else {
                        let d = spectral::differentiate(&grid, c.spectrum(), a, b);
                        block.extend(spectral::plan(grid).inverse_real(&d));
                    }
                }
                stacks.push(block);
            }
        }
        Self { grid, index, separations, comps: comps.len(), stacks, top_start }
    }

    pub fn index(&self) -> HolderIndex {
        self.index
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn norm(&self) -> f64 {
        norm_of_stacks(self, &self.stacks, self.index.fraction())
    }

    /// Discrete `C^s` distance `‖u − v‖_s`.
    pub fn distance(&self, other: &HolderFeatures) -> f64 {
        let mut scratch = Vec::new();
        self.distance_with(other, &mut scratch)
    }

    /// As [`distance`](Self::distance) with a caller-provided scratch buffer.
    pub fn distance_with(&self, other: &HolderFeatures, scratch: &mut Vec<Vec<f64>>) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.stacks.len(), other.stacks.len(), "order mismatch");
        scratch.resize_with(self.stacks.len(), Vec::new);
        for (buf, (a, b)) in scratch.iter_mut().zip(self.stacks.iter().zip(&other.stacks)) {
            buf.clear();
            buf.extend(a.iter().zip(b).map(|(x, y)| x - y));
        }
        norm_of_stacks(self, scratch, self.index.fraction())
    }

    /// Features of `Σ cᵢ uᵢ` from the features of the `uᵢ` (derivatives are linear).
    pub fn combination(coeffs: &[f64], parts: &[HolderFeatures]) -> HolderFeatures {
        assert_eq!(coeffs.len(), parts.len());
        let first = &parts[0];
        let mut stacks: Vec<Vec<f64>> = first.stacks.iter().map(|s| vec![0.0; s.len()]).collect();
        for (c, p) in coeffs.iter().zip(parts) {
            assert_eq!(p.grid, first.grid, "grid mismatch");
            if *c == 0.0 {
                continue;
            }
            for (out, s) in stacks.iter_mut().zip(&p.stacks) {
                for (o, v) in out.iter_mut().zip(s) {
                    *o += c * v;
                }
            }
        }
        HolderFeatures { stacks, ..first.clone_empty() }
    }

    fn clone_empty(&self) -> HolderFeatures {
        HolderFeatures {
            grid: self.grid,
            index: self.index,
            separations: self.separations,
            comps: self.comps,
            stacks: Vec::new(),
            top_start: self.top_start,
        }
    }

    /// `max_x |∂^α u(x) − ∂^α u(x + d·e_axis)|` over the top-order stacks,
    /// listed as `(separation distance, max difference)` per axis and offset.
    pub fn quotient_profile(&self) -> Vec<(f64, f64)> {
        let n = self.grid.n();
        let mut out = Vec::new();
        for axis in 0..2 {
            for d in self.separations.offsets(n) {
                let m = self.stacks[self.top_start..]
                    .iter()
                    .map(|s| max_shift_difference(s, self.comps, n, axis, d))
                    .fold(0.0, f64::max);
                out.push((separation_length(&self.grid, d), m));
            }
        }
        out
    }
}

fn separation_length(grid: &TorusGrid, d: usize) -> f64 {
    let l = d as f64 * grid.spacing();
    l.min(2.0 * PI - l)
}

fn sup_of_block(block: &[f64], comps: usize, len: usize) -> f64 {
    match comps {
        1 => max_sq_diff1(&block[..len], &vec![0.0; len]).sqrt(),
        _ => {
            let mut m = 0.0_f64;
            for idx in 0..len {
                let s: f64 = (0..comps).map(|c| block[c * len + idx].powi(2)).sum();
                m = if s > m { s } else { m };
            }
            m.sqrt()
        }
    }
}

fn max_shift_difference(block: &[f64], comps: usize, n: usize, axis: usize, d: usize) -> f64 {
    let len = n * n;
    let parts: Vec<&[f64]> = block.chunks_exact(len).take(comps).collect();
    let mut m = 0.0_f64;
    // Pairs (p, q) of flat indices are processed in contiguous runs so the
    // inner loops carry no modular arithmetic.
    let mut run = |p0: usize, q0: usize, count: usize| {
        let m_run = match parts.as_slice() {
            [a] => max_sq_diff1(&a[p0..p0 + count], &a[q0..q0 + count]),
            [a, b] => max_sq_diff2(&a[p0..p0 + count], &a[q0..q0 + count], &b[p0..p0 + count], &b[q0..q0 + count]),
            _ => (0..count)
                .map(|k| parts.iter().map(|c| (c[p0 + k] - c[q0 + k]).powi(2)).sum::<f64>())
                .fold(0.0, f64::max),
        };
        m = m.max(m_run);
    };
    if axis == 0 {
        let shift = d * n;
        run(0, shift, len - shift);
        run(len - shift, 0, shift);
    } else {
        for i in 0..n {
            let row = i * n;
            run(row, row + d, n - d);
            run(row + n - d, row, d);
        }
    }
    m.sqrt()
}

fn max_sq_diff1(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).fold(0.0, |m, v| if v > m { v } else { m })
}

fn max_sq_diff2(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> f64 {
    // Four independent running maxima let the loop vectorise.
    let mut lanes = [0.0_f64; 4];
    let n = p1.len();
    let split = n - n % 4;
    for k in (0..split).step_by(4) {
        for l in 0..4 {
            let a = p1[k + l] - q1[k + l];
            let b = p2[k + l] - q2[k + l];
            let v = a * a + b * b;
            lanes[l] = if v > lanes[l] { v } else { lanes[l] };
        }
    }
    for k in split..n {
        let a = p1[k] - q1[k];
        let b = p2[k] - q2[k];
        lanes[0] = lanes[0].max(a * a + b * b);
    }
    lanes.iter().copied().fold(0.0, f64::max)
}

fn norm_of_stacks(f: &HolderFeatures, stacks: &[Vec<f64>], gamma: f64) -> f64 {
    let n = f.grid.n();
    let len = n * n;
    let sup = stacks.iter().map(|s| sup_of_block(s, f.comps, len)).fold(0.0, f64::max);
    let mut quotient = 0.0_f64;
    for s in &stacks[f.top_start..] {
        for axis in 0..2 {
            for d in f.separations.offsets(n) {
                let q = max_shift_difference(s, f.comps, n, axis, d) / separation_length(&f.grid, d).powf(gamma);
                quotient = quotient.max(q);
            }
        }
    }
    sup + quotient
}

/// Discrete `C^s` norm with dyadic separations.
pub fn holder_norm<F: FieldLike + ?Sized>(u: &F, s: HolderIndex) -> f64 {
    HolderFeatures::new(u, s, Separations::Dyadic).norm()
}

/// Discrete `C^s` norm with an explicit separation set.
pub fn holder_norm_with<F: FieldLike + ?Sized>(u: &F, s: HolderIndex, separations: Separations) -> f64 {
    HolderFeatures::new(u, s, separations).norm()
}

/// Exponent margin χ added to `s + 1` in the sampler's coefficient decay.
pub const SAMPLER_DECAY_MARGIN: f64 = 0.1;

/// Random divergence-free fields on a sphere of a discrete Hölder norm.
///
/// Velocity Fourier coefficients are complex Gaussians scaled by
/// `|k|^{−(s+1+χ)}` on the band `1 ≤ |k|∞ ≤ kmax`; the field is then
/// rescaled so that its dyadic `C^s` norm equals `radius`.
#[derive(Clone, Debug)]
pub struct HolderBallSampler {
    pub index: HolderIndex,
    pub radius: f64,
    pub kmax: usize,
}

impl HolderBallSampler {
    /// Band limit `⌊n/3⌋` (the two-thirds dealiasing band).
    pub fn new(index: HolderIndex, radius: f64, grid: TorusGrid) -> Self {
        Self { index, radius, kmax: grid.n() / 3 }
    }

    pub fn with_kmax(mut self, kmax: usize) -> Self {
        self.kmax = kmax;
        self
    }

    pub fn sample(&self, grid: TorusGrid, seed: u64) -> VectorField2D {
        if self.radius == 0.0 {
            return VectorField2D::zeros(grid);
        }
        let n = grid.n();
        let kmax = self.kmax.min(n / 2 - 1).max(1) as i64;
        let decay = self.index.value() + 1.0 + SAMPLER_DECAY_MARGIN;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = vec![Complex64::new(0.0, 0.0); grid.len()];
        let scale = grid.len() as f64;
        let bin = |k: i64| k.rem_euclid(n as i64) as usize;
        for k1 in 0..=kmax {
            for k2 in -kmax..=kmax {
                if k1 == 0 && k2 <= 0 {
                    continue;
                }
                let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
                // |û| = |k|·|ψ̂|
                let amp = kk.powf(-decay) / kk;
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let c = Complex64::new(re, im) * (amp * scale * 0.5);
                psi[bin(k1) * n + bin(k2)] = c;
                psi[bin(-k1) * n + bin(-k2)] = c.conj();
            }
        }
        let (a, b) = {
            let d2 = spectral::differentiate(&grid, &psi, 0, 1);
            let d1 = spectral::differentiate(&grid, &psi, 1, 0);
            (d2.into_iter().map(|c| -c).collect::<Vec<_>>(), d1)
        };
        let u = VectorField2D::from_parts(
            ScalarField2D::from_spectrum(grid, &a),
            ScalarField2D::from_spectrum(grid, &b),
        );
        let norm = holder_norm(&u, self.index);
        u.scale(self.radius / norm)
    }
}

/// Divergence-free sample with `‖u‖_s = radius`, deterministic in `seed`.
pub fn sample_holder_ball(s: HolderIndex, radius: f64, seed: u64, grid: TorusGrid) -> VectorField2D {
    HolderBallSampler::new(s, radius, grid).sample(grid, seed)
}
