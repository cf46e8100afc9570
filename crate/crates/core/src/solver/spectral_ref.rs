use rustfft::num_complex::Complex64;

use crate::field::{ScalarField2D, VectorField2D};
use crate::grid::TorusGrid;
use crate::spectral;

use super::{Integrator, PreparedForcing, SolverConfig};

/// Pseudospectral RK4 for `∂ₜω + w·∇ω = ∇⊥·f`, with the two-thirds rule
/// applied to the state and to every right-hand side when enabled.
pub(crate) struct SpectralRk4 {
    grid: TorusGrid,
    forcing: PreparedForcing,
    mask: Vec<f64>,
    omega: Vec<Complex64>,
    mean: (f64, f64),
    vel: (Vec<f64>, Vec<f64>),
}

impl SpectralRk4 {
    pub fn new(w0: &VectorField2D, forcing: PreparedForcing, config: &SolverConfig) -> Self {
        let grid = config.grid;
        let n = grid.n();
        let cutoff = n as i64;
        let mask: Vec<f64> = (0..n * n)
            .map(|idx| {
                let k1 = grid.wavenumber(idx / n).abs();
                let k2 = grid.wavenumber(idx % n).abs();
                if !config.dealias || (3 * k1 < cutoff && 3 * k2 < cutoff) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let u1 = w0.u1().spectrum();
        let u2 = w0.u2().spectrum();
        let mut omega = spectral::curl(&grid, u1, u2);
        omega[0] = Complex64::new(0.0, 0.0);
        for (o, m) in omega.iter_mut().zip(&mask) {
            *o *= m;
        }
        let mean = w0.mean();
        let mut s = Self { grid, forcing, mask, omega, mean, vel: (Vec::new(), Vec::new()) };
        s.vel = s.physical_velocity(&s.omega, s.mean);
        s
    }

    fn physical_velocity(&self, omega: &[Complex64], mean: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
        let plan = spectral::plan(self.grid);
        let (a, b) = spectral::biot_savart(&self.grid, omega);
        let mut u1 = plan.inverse_real(&a);
        let mut u2 = plan.inverse_real(&b);
        u1.iter_mut().for_each(|x| *x += mean.0);
        u2.iter_mut().for_each(|x| *x += mean.1);
        (u1, u2)
    }

    fn rhs(&self, omega: &[Complex64], mean: (f64, f64), t: f64, a: f64, b: f64) -> (Vec<Complex64>, (f64, f64)) {
        let plan = spectral::plan(self.grid);
        let (u1, u2) = self.physical_velocity(omega, mean);
        let wx = plan.inverse_real(&spectral::differentiate(&self.grid, omega, 1, 0));
        let wy = plan.inverse_real(&spectral::differentiate(&self.grid, omega, 0, 1));
        let adv: Vec<f64> = (0..wx.len()).map(|k| u1[k] * wx[k] + u2[k] * wy[k]).collect();
        let mut out = plan.forward(&adv);
        for (o, m) in out.iter_mut().zip(&self.mask) {
            *o = -*o * m;
        }
        let mut dmean = (0.0, 0.0);
        if let Some(src) = self.forcing.rate(t, a, b) {
            for ((o, s), m) in out.iter_mut().zip(&src.vorticity).zip(&self.mask) {
                *o += s * m;
            }
            dmean = src.mean;
        }
        out[0] = Complex64::new(0.0, 0.0);
        (out, dmean)
    }
}

fn axpy(base: &[Complex64], c: f64, d: &[Complex64]) -> Vec<Complex64> {
    base.iter().zip(d).map(|(x, y)| x + y * c).collect()
}

impl Integrator for SpectralRk4 {
    fn step(&mut self, t0: f64, t1: f64) {
        let dt = t1 - t0;
        let tm = t0 + 0.5 * dt;
        let m = self.mean;
        let (k1, m1) = self.rhs(&self.omega, m, t0, t0, t1);
        let (k2, m2) = self.rhs(&axpy(&self.omega, 0.5 * dt, &k1), (m.0 + 0.5 * dt * m1.0, m.1 + 0.5 * dt * m1.1), tm, t0, t1);
        let (k3, m3) = self.rhs(&axpy(&self.omega, 0.5 * dt, &k2), (m.0 + 0.5 * dt * m2.0, m.1 + 0.5 * dt * m2.1), tm, t0, t1);
        let (k4, m4) = self.rhs(&axpy(&self.omega, dt, &k3), (m.0 + dt * m3.0, m.1 + dt * m3.1), t1, t0, t1);
        for i in 0..self.omega.len() {
            self.omega[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        self.mean = (
            m.0 + dt / 6.0 * (m1.0 + 2.0 * m2.0 + 2.0 * m3.0 + m4.0),
            m.1 + dt / 6.0 * (m1.1 + 2.0 * m2.1 + 2.0 * m3.1 + m4.1),
        );
        self.vel = self.physical_velocity(&self.omega, self.mean);
    }

    fn velocity(&self) -> VectorField2D {
        VectorField2D::from_parts(
            ScalarField2D::from_vec_unchecked(self.grid, self.vel.0.clone()),
            ScalarField2D::from_vec_unchecked(self.grid, self.vel.1.clone()),
        )
    }

    fn vorticity(&self) -> ScalarField2D {
        ScalarField2D::from_spectrum(self.grid, &self.omega)
    }

    fn max_speed(&self) -> f64 {
        self.vel.0.iter().zip(&self.vel.1).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}
