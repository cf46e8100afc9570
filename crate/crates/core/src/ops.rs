//! Differential operators on the torus: `∇⊥`, scalar curl, `Δ⁻¹`, the
//! Biot–Savart operator `G = ∇⊥Δ⁻¹` and the Leray projection.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField2D, VectorField2D};
use crate::spectral;

/// Relative tolerance on the mean accepted by [`inv_laplacian`].
pub const ZERO_MEAN_TOL: f64 = 1e-8;

/// `∇⊥f = (−∂₂f, ∂₁f)`.
pub fn grad_perp(f: &ScalarField2D) -> VectorField2D {
    VectorField2D::from_parts(-&f.derivative(0, 1), f.derivative(1, 0))
}

pub fn gradient(f: &ScalarField2D) -> VectorField2D {
    VectorField2D::from_parts(f.derivative(1, 0), f.derivative(0, 1))
}

/// Scalar vorticity `∇⊥·u = −∂₂u₁ + ∂₁u₂`.
pub fn curl2d(u: &VectorField2D) -> ScalarField2D {
    let grid = u.grid();
    let c = spectral::curl(&grid, u.u1().spectrum(), u.u2().spectrum());
    ScalarField2D::from_spectrum(grid, &c)
}

pub fn divergence(u: &VectorField2D) -> ScalarField2D {
    u.divergence()
}

fn check_zero_mean(f: &ScalarField2D) -> Result<()> {
    let sup = f.sup_norm();
    if f.mean().abs() > ZERO_MEAN_TOL * sup {
        return Err(Error::NonZeroMean { mean: f.mean(), sup });
    }
    Ok(())
}

/// Inverse Laplacian on zero-mean functions; the result has zero mean.
pub fn inv_laplacian(f: &ScalarField2D) -> Result<ScalarField2D> {
    check_zero_mean(f)?;
    Ok(inv_laplacian_unchecked(f))
}

/// Inverse Laplacian applied to `f − mean(f)`.
pub(crate) fn inv_laplacian_unchecked(f: &ScalarField2D) -> ScalarField2D {
    let grid = f.grid();
    ScalarField2D::from_spectrum(grid, &spectral::inverse_laplacian(&grid, f.spectrum()))
}

/// Velocity `Gω = ∇⊥Δ⁻¹ω` recovered from a zero-mean vorticity.
pub fn biot_savart(omega: &ScalarField2D) -> Result<VectorField2D> {
    check_zero_mean(omega)?;
    Ok(biot_savart_unchecked(omega))
}

pub(crate) fn biot_savart_unchecked(omega: &ScalarField2D) -> VectorField2D {
    let grid = omega.grid();
    let (a, b) = spectral::biot_savart(&grid, omega.spectrum());
    VectorField2D::from_parts(
        ScalarField2D::from_spectrum(grid, &a),
        ScalarField2D::from_spectrum(grid, &b),
    )
}

/// Leray projection `Πu = u − ∇Δ⁻¹ div u`.
pub fn leray_project(u: &VectorField2D) -> VectorField2D {
    let grid = u.grid();
    let n = grid.n();
    let s1 = u.u1().spectrum();
    let s2 = u.u2().spectrum();
    let mut p1 = s1.to_vec();
    let mut p2 = s2.to_vec();
    for p in 0..n {
        let d1 = spectral::axis_symbol(&grid, p, 1);
        for q in 0..n {
            if p == 0 && q == 0 {
                continue;
            }
            let d2 = spectral::axis_symbol(&grid, q, 1);
            let idx = p * n + q;
            // ∇Δ⁻¹ div with the same one-sided derivative symbols as `divergence`.
            let div = d1 * s1[idx] + d2 * s2[idx];
            let phi: Complex64 = -div / spectral::k_squared(&grid, p, q);
            p1[idx] -= d1 * phi;
            p2[idx] -= d2 * phi;
        }
    }
    VectorField2D::from_parts(
        ScalarField2D::from_spectrum(grid, &p1),
        ScalarField2D::from_spectrum(grid, &p2),
    )
}
