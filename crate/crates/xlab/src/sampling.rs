//! Random data `(u₀, z, f)` in balls of `D_T = C^s × W^{1,1}(J, C^s) × L¹(J, C^s)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use xlab_core::control::{self, ControlPath, ControlSpace};
use xlab_core::holder::HolderBallSampler;
use xlab_core::solver::{FieldPath, ForcingPath, Triple};
use xlab_core::{holder_norm, HolderIndex, Result, TorusGrid, VectorField2D};

/// A datum on a uniform mesh of `[0, T]`: `z` is piecewise linear through
/// `z_nodes` and `f` is constant on each interval.
#[derive(Clone, Debug)]
pub struct Datum {
    pub u0: VectorField2D,
    pub z_nodes: Vec<VectorField2D>,
    pub f: Vec<VectorField2D>,
    pub horizon: f64,
}

impl Datum {
    pub fn breakpoints(&self) -> Vec<f64> {
        let l = self.f.len();
        (0..=l).map(|k| self.horizon * k as f64 / l as f64).collect()
    }

    pub fn z_path(&self) -> Result<FieldPath> {
        FieldPath::new(self.breakpoints(), self.z_nodes.clone())
    }

    pub fn forcing(&self) -> Result<ForcingPath> {
        ForcingPath::piecewise_constant(&self.breakpoints(), self.f.clone())
    }

    pub fn triple(&self) -> Result<Triple> {
        Triple::new(self.u0.clone(), Some(self.z_path()?), self.forcing()?, self.horizon)
    }

    /// `self + a · dir`.
    pub fn axpy(&self, a: f64, dir: &Datum) -> Datum {
        let comb = |x: &[VectorField2D], y: &[VectorField2D]| -> Vec<VectorField2D> {
            x.iter().zip(y).map(|(p, q)| p.axpy(a, q)).collect()
        };
        Datum {
            u0: self.u0.axpy(a, &dir.u0),
            z_nodes: comb(&self.z_nodes, &dir.z_nodes),
            f: comb(&self.f, &dir.f),
            horizon: self.horizon,
        }
    }

    /// `‖u₀‖_{C^s} + ‖z‖_{W^{1,1}(C^s)} + ‖f‖_{L¹(C^s)}`.
    pub fn d_norm(&self, s: HolderIndex) -> Result<f64> {
        Ok(self.triple()?.d_norm(s))
    }

    /// `‖u₀‖_{C^{s−1}} + ‖z‖_{L¹(C^s)} + ‖f‖_{L¹(C^{s−1})}`, the weaker data
    /// norm in which the resolving operator is Lipschitz.
    pub fn lipschitz_norm(&self, s: HolderIndex, s1: HolderIndex) -> Result<f64> {
        let ns = |v: &VectorField2D| holder_norm(v, s);
        let ns1 = |v: &VectorField2D| holder_norm(v, s1);
        Ok(holder_norm(&self.u0, s1) + self.z_path()?.l1_norm(&ns) + self.forcing()?.l1_norm(self.horizon, &ns1))
    }
}

/// Draws data with `‖u₀‖ = w₀ρ`, `‖z‖_{W^{1,1}} = w₁ρ`, `‖f‖_{L¹} = w₂ρ` in
/// `C^s`, so that the `D_T` norm is exactly `ρ`.
#[derive(Clone, Debug)]
pub struct DatumSampler {
    pub grid: TorusGrid,
    pub s: HolderIndex,
    pub intervals: usize,
    pub horizon: f64,
    pub space: ControlSpace,
}

/// Uniform weights on the 2-simplex.
pub fn simplex_weights(rng: &mut impl Rng) -> [f64; 3] {
    let e: [f64; 3] = std::array::from_fn(|_| Exp1.sample(rng));
    let total: f64 = e.iter().sum();
    e.map(|v| v / total)
}

impl DatumSampler {
    pub fn new(grid: TorusGrid, s: HolderIndex, intervals: usize, horizon: f64) -> Self {
        Self { grid, s, intervals, horizon, space: ControlSpace::default_space(grid) }
    }

    pub fn sample(&self, radius: f64, weights: [f64; 3], rng: &mut impl Rng) -> Datum {
        let g = self.grid;
        let norm = |v: &VectorField2D| holder_norm(v, self.s);
        let sampler = |r: f64| HolderBallSampler::new(self.s, r, g);

        let u0 = sampler(weights[0] * radius).sample(g, rng.random());

        let coeffs: Vec<Vec<f64>> = (0..self.intervals)
            .map(|_| (0..self.space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let eta = ControlPath::uniform(self.horizon, coeffs).expect("uniform control path");
        let z = control::primitive(&eta).to_field_path(&self.space).expect("matching dimension");
        let zn = z.w11_norm(&norm);
        let zs = if zn > 0.0 { weights[1] * radius / zn } else { 0.0 };
        let z_nodes = z.nodes().iter().map(|v| v.scale(zs)).collect();

        let raw: Vec<VectorField2D> = (0..self.intervals)
            .map(|_| {
                let amp: f64 = rng.random_range(0.0..1.0);
                sampler(amp).sample(g, rng.random())
            })
            .collect();
        let dt = self.horizon / self.intervals as f64;
        let fnorm: f64 = raw.iter().map(|v| dt * norm(v)).sum();
        let fs = if fnorm > 0.0 { weights[2] * radius / fnorm } else { 0.0 };
        let f = raw.iter().map(|v| v.scale(fs)).collect();

        Datum { u0, z_nodes, f, horizon: self.horizon }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xlab_core::rng;

    #[test]
    fn sampled_data_has_requested_norm() {
        let g = TorusGrid::new(16).unwrap();
        let s = HolderIndex::new(2.5).unwrap();
        let sp = DatumSampler::new(g, s, 3, 1.0);
        let mut r = rng::stream(1, 2, 3);
        let w = simplex_weights(&mut r);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let d = sp.sample(0.9, w, &mut r);
        assert!((d.d_norm(s).unwrap() - 0.9).abs() < 1e-9);
        let only_f = sp.sample(1.0, [0.0, 0.0, 1.0], &mut r);
        assert_eq!(only_f.u0.sup_norm(), 0.0);
        assert!(only_f.z_nodes.iter().all(|z| z.sup_norm() == 0.0));
        assert!(only_f.triple().is_ok());
    }

    #[test]
    fn axpy_is_componentwise() {
        let g = TorusGrid::new(16).unwrap();
        let s = HolderIndex::new(2.5).unwrap();
        let sp = DatumSampler::new(g, s, 2, 1.0);
        let mut r = rng::stream(4, 2, 3);
        let a = sp.sample(0.5, [0.2, 0.3, 0.5], &mut r);
        let b = a.axpy(-1.0, &a);
        assert_eq!(b.d_norm(s).unwrap(), 0.0);
    }
}
