use crate::field::{ScalarField2D, VectorField2D};
use crate::grid::TorusGrid;
use crate::spectral;

use super::interp::{self, InterpOrder};
use super::{Integrator, PreparedForcing, SolverConfig};

/// Vorticity transport along back-traced characteristics:
///
/// `ω(t₁, x) = [ω(t₀) + ½S](X) + ½S(x)`, `S = ∫_{t₀}^{t₁} ∇⊥·f dt`,
///
/// where `X` is the foot of the characteristic through `x`, traced with the
/// midpoint rule in the time-centred velocity `½(w(t₀) + w(t₁))`. The
/// unknown `w(t₁)` is resolved by a few fixed-point passes.
pub(crate) struct SemiLagrangian {
    grid: TorusGrid,
    order: InterpOrder,
    passes: usize,
    forcing: PreparedForcing,
    omega: Vec<f64>,
    mean: (f64, f64),
    vel: (Vec<f64>, Vec<f64>),
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn velocity_from(grid: TorusGrid, omega: &[f64], mean: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let plan = spectral::plan(grid);
    let (a, b) = spectral::biot_savart(&grid, &plan.forward(omega));
    let mut u1 = plan.inverse_real(&a);
    let mut u2 = plan.inverse_real(&b);
    if mean.0 != 0.0 {
        u1.iter_mut().for_each(|x| *x += mean.0);
    }
    if mean.1 != 0.0 {
        u2.iter_mut().for_each(|x| *x += mean.1);
    }
    (u1, u2)
}

impl SemiLagrangian {
    pub fn new(w0: &VectorField2D, forcing: PreparedForcing, config: &SolverConfig) -> Self {
        let grid = config.grid;
        let mut omega = crate::ops::curl2d(w0).values().to_vec();
        remove_mean(&mut omega);
        let mean = w0.mean();
        let vel = velocity_from(grid, &omega, mean);
        Self {
            grid,
            order: config.interp,
            passes: config.corrector_passes.max(1),
            forcing,
            omega,
            mean,
            vel,
        }
    }
}

impl Integrator for SemiLagrangian {
    fn step(&mut self, t0: f64, t1: f64) {
        let n = self.grid.n();
        // Displacement in index units per unit velocity.
        let c = (t1 - t0) / self.grid.spacing();
        let source = self.forcing.impulse(t0, t1);
        let (src, mean_new) = match &source {
            Some(s) => {
                let src: Vec<f64> = self.omega.iter().zip(&s.vorticity).map(|(w, s)| w + 0.5 * s).collect();
                (src, (self.mean.0 + s.mean.0, self.mean.1 + s.mean.1))
            }
            None => (self.omega.clone(), self.mean),
        };

        let mut vel_new = self.vel.clone();
        let mut omega_new = vec![0.0; n * n];
        let mut half1 = vec![0.0; n * n];
        let mut half2 = vec![0.0; n * n];
        for _ in 0..self.passes {
            for k in 0..n * n {
                half1[k] = 0.5 * (self.vel.0[k] + vel_new.0[k]);
                half2[k] = 0.5 * (self.vel.1[k] + vel_new.1[k]);
            }
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    let xm = i as f64 - 0.5 * c * half1[k];
                    let ym = j as f64 - 0.5 * c * half2[k];
                    let a1 = interp::sample(&half1, n, self.order, xm, ym);
                    let a2 = interp::sample(&half2, n, self.order, xm, ym);
                    let xd = i as f64 - c * a1;
                    let yd = j as f64 - c * a2;
                    omega_new[k] = interp::sample(&src, n, self.order, xd, yd);
                }
            }
            if let Some(s) = &source {
                for (o, s) in omega_new.iter_mut().zip(&s.vorticity) {
                    *o += 0.5 * s;
                }
            }
            remove_mean(&mut omega_new);
            vel_new = velocity_from(self.grid, &omega_new, mean_new);
        }
        self.omega = omega_new;
        self.mean = mean_new;
        self.vel = vel_new;
    }

    fn velocity(&self) -> VectorField2D {
        VectorField2D::from_parts(
            ScalarField2D::from_vec_unchecked(self.grid, self.vel.0.clone()),
            ScalarField2D::from_vec_unchecked(self.grid, self.vel.1.clone()),
        )
    }

    fn vorticity(&self) -> ScalarField2D {
        ScalarField2D::from_vec_unchecked(self.grid, self.omega.clone())
    }

    fn max_speed(&self) -> f64 {
        self.vel.0.iter().zip(&self.vel.1).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}
