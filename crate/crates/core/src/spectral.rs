//! 2D FFT plans and spectral multipliers shared by the field operators and
//! the solvers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::TorusGrid;

pub(crate) struct Plan2d {
    grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

pub(crate) fn plan(grid: TorusGrid) -> Arc<Plan2d> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan2d>>>> = OnceLock::new();
    let mut plans = PLANS
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .expect("fft plan cache poisoned");
    plans
        .entry(grid.n())
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan2d {
                grid,
                fwd: planner.plan_fft_forward(grid.n()),
                inv: planner.plan_fft_inverse(grid.n()),
            })
        })
        .clone()
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

impl Plan2d {
    fn run(&self, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let n = self.grid.n();
        let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
        fft.process(buf);
        transpose(buf, &mut tmp, n);
        fft.process(&mut tmp);
        transpose(&tmp, buf, n);
    }

    /// Unnormalised forward transform of real grid values.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&self.fwd, &mut buf);
        buf
    }

    /// Inverse transform (normalised by `1/n²`), keeping the real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.run(&self.inv, &mut buf);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

/// Multiplier of `∂^order` along one axis at FFT bin `p`. Odd derivatives
/// vanish on the Nyquist bin so that real fields stay real.
#[inline]
pub(crate) fn axis_symbol(grid: &TorusGrid, p: usize, order: u32) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let n = grid.n();
    if order % 2 == 1 && p == n / 2 {
        return Complex64::new(0.0, 0.0);
    }
    let k = grid.wavenumber(p) as f64;
    Complex64::new(0.0, k).powu(order)
}

/// Applies `∂₁^a ∂₂^b` to a spectrum.
pub(crate) fn differentiate(grid: &TorusGrid, spec: &[Complex64], a: u32, b: u32) -> Vec<Complex64> {
    let n = grid.n();
    let s1: Vec<Complex64> = (0..n).map(|p| axis_symbol(grid, p, a)).collect();
    let s2: Vec<Complex64> = (0..n).map(|q| axis_symbol(grid, q, b)).collect();
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            out.push(spec[p * n + q] * s1[p] * s2[q]);
        }
    }
    out
}

/// `|k|²` with the Nyquist bin counted as `n/2`, matching `∂₁² + ∂₂²`.
#[inline]
pub(crate) fn k_squared(grid: &TorusGrid, p: usize, q: usize) -> f64 {
    let k1 = grid.wavenumber(p) as f64;
    let k2 = grid.wavenumber(q) as f64;
    k1 * k1 + k2 * k2
}

/// Inverse Laplacian on the zero-mean subspace; the zero mode is dropped.
pub(crate) fn inverse_laplacian(grid: &TorusGrid, spec: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for p in 0..n {
        for q in 0..n {
            if p == 0 && q == 0 {
                continue;
            }
            out[p * n + q] = -spec[p * n + q] / k_squared(grid, p, q);
        }
    }
    out
}

/// Biot–Savart in spectral space: returns `(û₁, û₂)` of `∇⊥Δ⁻¹ω`.
pub(crate) fn biot_savart(grid: &TorusGrid, omega: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let psi = inverse_laplacian(grid, omega);
    let d2 = differentiate(grid, &psi, 0, 1);
    let d1 = differentiate(grid, &psi, 1, 0);
    (d2.into_iter().map(|c| -c).collect(), d1)
}

/// Spectral curl `−∂₂u₁ + ∂₁u₂`.
pub(crate) fn curl(grid: &TorusGrid, u1: &[Complex64], u2: &[Complex64]) -> Vec<Complex64> {
    let a = differentiate(grid, u1, 0, 1);
    let b = differentiate(grid, u2, 1, 0);
    a.iter().zip(&b).map(|(x, y)| y - x).collect()
}
