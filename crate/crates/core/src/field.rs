//! Doubly periodic grid functions with cached spectral companions.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::spectral;

/// Real scalar field on a [`TorusGrid`], stored row-major with `x₁` as the
/// slow index. The mean is stored alongside the values.
#[derive(Clone, Debug)]
pub struct ScalarField2D {
    grid: TorusGrid,
    values: Arc<[f64]>,
    mean: f64,
    spectrum: OnceLock<Arc<[Complex64]>>,
}

impl ScalarField2D {
    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), actual: values.len() });
        }
        Ok(Self::from_vec_unchecked(grid, values))
    }

    pub(crate) fn from_vec_unchecked(grid: TorusGrid, values: Vec<f64>) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Self { grid, values: values.into(), mean, spectrum: OnceLock::new() }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x1 = grid.coord(i);
            for j in 0..n {
                values.push(f(x1, grid.coord(j)));
            }
        }
        Self::from_vec_unchecked(grid, values)
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self::from_vec_unchecked(grid, vec![c; grid.len()])
    }

    pub(crate) fn from_spectrum(grid: TorusGrid, spec: &[Complex64]) -> Self {
        Self::from_vec_unchecked(grid, spectral::plan(grid).inverse_real(spec))
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.index(i1, i2)]
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Max-norm over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f² dx` over the torus.
    pub fn l2_norm_squared(&self) -> f64 {
        let area = (2.0 * std::f64::consts::PI).powi(2);
        self.values.iter().map(|v| v * v).sum::<f64>() / self.grid.len() as f64 * area
    }

    /// Unnormalised DFT of the values, computed once and cached.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| spectral::plan(self.grid).forward(&self.values).into())
    }

    /// Spectral derivative `∂₁^a ∂₂^b`.
    pub fn derivative(&self, a: u32, b: u32) -> ScalarField2D {
        if a == 0 && b == 0 {
            return self.clone();
        }
        let d = spectral::differentiate(&self.grid, self.spectrum(), a, b);
        Self::from_spectrum(self.grid, &d)
    }

    pub fn laplacian(&self) -> ScalarField2D {
        let a = spectral::differentiate(&self.grid, self.spectrum(), 2, 0);
        let b = spectral::differentiate(&self.grid, self.spectrum(), 0, 2);
        let s: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        Self::from_spectrum(self.grid, &s)
    }

    /// Copy with the mean removed.
    pub fn without_mean(&self) -> ScalarField2D {
        let m = self.mean;
        self.map(|v| v - m)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField2D {
        Self::from_vec_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &ScalarField2D, f: impl Fn(f64, f64) -> f64) -> ScalarField2D {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::from_vec_unchecked(
            self.grid,
            self.values.iter().zip(other.values.iter()).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> ScalarField2D {
        self.map(|v| c * v)
    }

    /// Max-norm of `self − other`.
    pub fn sup_distance(&self, other: &ScalarField2D) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl PartialEq for ScalarField2D {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl Add for &ScalarField2D {
    type Output = ScalarField2D;
    fn add(self, rhs: &ScalarField2D) -> ScalarField2D {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField2D {
    type Output = ScalarField2D;
    fn sub(self, rhs: &ScalarField2D) -> ScalarField2D {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField2D {
    type Output = ScalarField2D;
    fn mul(self, c: f64) -> ScalarField2D {
        self.scale(c)
    }
}

impl Neg for &ScalarField2D {
    type Output = ScalarField2D;
    fn neg(self) -> ScalarField2D {
        self.scale(-1.0)
    }
}

/// Planar vector field `(u₁, u₂)` on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2D {
    u1: ScalarField2D,
    u2: ScalarField2D,
}

impl VectorField2D {
    pub fn new(u1: ScalarField2D, u2: ScalarField2D) -> Result<Self> {
        u1.grid.check_same(&u2.grid)?;
        Ok(Self { u1, u2 })
    }

    pub(crate) fn from_parts(u1: ScalarField2D, u2: ScalarField2D) -> Self {
        debug_assert_eq!(u1.grid, u2.grid);
        Self { u1, u2 }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let u1 = ScalarField2D::from_fn(grid, |x1, x2| f(x1, x2).0);
        let u2 = ScalarField2D::from_fn(grid, |x1, x2| f(x1, x2).1);
        Self { u1, u2 }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { u1: ScalarField2D::zeros(grid), u2: ScalarField2D::zeros(grid) }
    }

    pub fn constant(grid: TorusGrid, c: (f64, f64)) -> Self {
        Self { u1: ScalarField2D::constant(grid, c.0), u2: ScalarField2D::constant(grid, c.1) }
    }

    pub fn grid(&self) -> TorusGrid {
        self.u1.grid
    }

    pub fn u1(&self) -> &ScalarField2D {
        &self.u1
    }

    pub fn u2(&self) -> &ScalarField2D {
        &self.u2
    }

    pub fn mean(&self) -> (f64, f64) {
        (self.u1.mean, self.u2.mean)
    }

    /// `sup_x |u(x)|` with the Euclidean norm on `ℝ²`.
    pub fn sup_norm(&self) -> f64 {
        self.u1
            .values
            .iter()
            .zip(self.u2.values.iter())
            .fold(0.0_f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn sup_distance(&self, other: &VectorField2D) -> f64 {
        let mut m = 0.0_f64;
        for k in 0..self.u1.values.len() {
            let d1 = self.u1.values[k] - other.u1.values[k];
            let d2 = self.u2.values[k] - other.u2.values[k];
            m = m.max(d1.hypot(d2));
        }
        m
    }

    /// `∫ u·v dx` over the torus.
    pub fn l2_inner(&self, other: &VectorField2D) -> f64 {
        let area = (2.0 * std::f64::consts::PI).powi(2);
        let s: f64 = (0..self.u1.values.len())
            .map(|k| self.u1.values[k] * other.u1.values[k] + self.u2.values[k] * other.u2.values[k])
            .sum();
        s / self.u1.values.len() as f64 * area
    }

    pub fn divergence(&self) -> ScalarField2D {
        &self.u1.derivative(1, 0) + &self.u2.derivative(0, 1)
    }

    /// Max-norm of the spectral divergence.
    pub fn max_divergence(&self) -> f64 {
        self.divergence().sup_norm()
    }

    /// True when `max|div u| ≤ rel_tol · sup|u|`.
    pub fn is_divergence_free(&self, rel_tol: f64) -> bool {
        self.max_divergence() <= rel_tol * self.sup_norm()
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField2D) -> ScalarField2D) -> VectorField2D {
        Self { u1: f(&self.u1), u2: f(&self.u2) }
    }

    pub fn scale(&self, c: f64) -> VectorField2D {
        self.map_components(|u| u.scale(c))
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &VectorField2D) -> VectorField2D {
        Self {
            u1: self.u1.zip_with(&other.u1, |a, b| a + c * b),
            u2: self.u2.zip_with(&other.u2, |a, b| a + c * b),
        }
    }

    /// Linear combination `Σ cᵢ fieldsᵢ`. Panics on an empty list.
    pub fn combination(coeffs: &[f64], fields: &[VectorField2D]) -> VectorField2D {
        assert_eq!(coeffs.len(), fields.len());
        let grid = fields[0].grid();
        let mut a = vec![0.0; grid.len()];
        let mut b = vec![0.0; grid.len()];
        for (c, f) in coeffs.iter().zip(fields) {
            if *c == 0.0 {
                continue;
            }
            for k in 0..a.len() {
                a[k] += c * f.u1.values[k];
                b[k] += c * f.u2.values[k];
            }
        }
        Self {
            u1: ScalarField2D::from_vec_unchecked(grid, a),
            u2: ScalarField2D::from_vec_unchecked(grid, b),
        }
    }
}

impl Add for &VectorField2D {
    type Output = VectorField2D;
    fn add(self, rhs: &VectorField2D) -> VectorField2D {
        VectorField2D { u1: &self.u1 + &rhs.u1, u2: &self.u2 + &rhs.u2 }
    }
}

impl Sub for &VectorField2D {
    type Output = VectorField2D;
    fn sub(self, rhs: &VectorField2D) -> VectorField2D {
        VectorField2D { u1: &self.u1 - &rhs.u1, u2: &self.u2 - &rhs.u2 }
    }
}

impl Mul<f64> for &VectorField2D {
    type Output = VectorField2D;
    fn mul(self, c: f64) -> VectorField2D {
        self.scale(c)
    }
}

/// Common view of scalar and vector fields as a list of scalar components.
pub trait FieldLike {
    fn grid(&self) -> TorusGrid;
    fn components(&self) -> Vec<&ScalarField2D>;
}

impl FieldLike for ScalarField2D {
    fn grid(&self) -> TorusGrid {
        self.grid
    }
    fn components(&self) -> Vec<&ScalarField2D> {
        vec![self]
    }
}

impl FieldLike for VectorField2D {
    fn grid(&self) -> TorusGrid {
        self.u1.grid
    }
    fn components(&self) -> Vec<&ScalarField2D> {
        vec![&self.u1, &self.u2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(32).unwrap()
    }

    #[test]
    fn spectral_round_trip_is_exact_to_roundoff() {
        let f = ScalarField2D::from_fn(grid(), |x, y| (3.0 * x).sin() * (2.0 * y).cos() + 0.25);
        let back = ScalarField2D::from_spectrum(grid(), f.spectrum());
        assert!(f.sup_distance(&back) <= 1e-12 * f.sup_norm());
        assert!((f.mean() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_single_mode() {
        let f = ScalarField2D::from_fn(grid(), |x, _| x.sin());
        let d = f.derivative(1, 0);
        let exact = ScalarField2D::from_fn(grid(), |x, _| x.cos());
        assert!(d.sup_distance(&exact) < 1e-12);
        assert!(f.derivative(0, 1).sup_norm() < 1e-12);
    }

    #[test]
    fn l2_norm_of_sine() {
        let f = ScalarField2D::from_fn(grid(), |x, _| x.sin());
        let pi = std::f64::consts::PI;
        assert!((f.l2_norm_squared() - 2.0 * pi * pi).abs() < 1e-10);
    }
}
