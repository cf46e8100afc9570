use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField2D, VectorField2D};
use crate::ops;

use super::SolutionTrajectory;

/// Zero-mean pressure solving `Δp = div(f − ⟨u+z, ∇⟩(u+z))`.
pub fn recover_pressure(u: &VectorField2D, z: &VectorField2D, f: &VectorField2D) -> ScalarField2D {
    let v = u + z;
    let advect = |c: &ScalarField2D| {
        let d1 = c.derivative(1, 0);
        let d2 = c.derivative(0, 1);
        let a = v.u1().zip_with(&d1, |x, y| x * y);
        let b = v.u2().zip_with(&d2, |x, y| x * y);
        &a + &b
    };
    let nonlinear = VectorField2D::from_parts(advect(v.u1()), advect(v.u2()));
    let rhs = (f - &nonlinear).divergence();
    ops::inv_laplacian_unchecked(&rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Conserved {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
}

/// Energy `½∫|u|²` and enstrophy `½∫ω²` at every sample of a trajectory.
pub fn conserved_quantities(traj: &SolutionTrajectory) -> Result<Vec<Conserved>> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let area = (2.0 * PI).powi(2);
    Ok(traj
        .times
        .iter()
        .zip(traj.velocity.iter().zip(&traj.vorticity))
        .map(|(&t, (u, w))| {
            let len = u.grid().len() as f64;
            let e: f64 = u.u1().values().iter().zip(u.u2().values()).map(|(a, b)| a * a + b * b).sum();
            let z: f64 = w.values().iter().map(|x| x * x).sum();
            Conserved { t, energy: 0.5 * e / len * area, enstrophy: 0.5 * z / len * area }
        })
        .collect())
}

/// Largest relative deviation of energy and enstrophy from their initial values.
pub fn relative_drift(series: &[Conserved]) -> (f64, f64) {
    let e0 = series[0].energy;
    let z0 = series[0].enstrophy;
    let rel = |x: f64, x0: f64| if x0 == 0.0 { x.abs() } else { ((x - x0) / x0).abs() };
    series.iter().fold((0.0, 0.0), |(de, dz), c| {
        (f64::max(de, rel(c.energy, e0)), f64::max(dz, rel(c.enstrophy, z0)))
    })
}
