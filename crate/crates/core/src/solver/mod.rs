//! Strong solutions of the Euler-type system
//!
//! ```text
//! ∂ₜu + ⟨u+z, ∇⟩(u+z) + ∇p = f,   div u = 0,   u(0) = u₀
//! ```
//!
//! on the torus. The shifted unknown `w = u + z` solves the standard Euler
//! system with force `f + ż` and `w(0) = u₀ + z(0)`; a single kernel for
//! standard Euler is therefore enough, and `u = w − z` is returned.
//!
//! Two kernels advance the vorticity `ω = ∇⊥·w`:
//! * [`Method::SemiLagrangian`]: `ω` is carried along back-traced
//!   characteristics (second-order midpoint tracing, periodic cubic
//!   interpolation) with the vorticity source integrated by the trapezoid rule
//!   along each characteristic;
//! * [`Method::SpectralReference`]: pseudospectral RK4 with optional
//!   two-thirds dealiasing, used as an independent oracle.

pub mod diagnostics;
pub mod flow;
pub mod forcing;
mod interp;
mod semi_lagrangian;
mod spectral_ref;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField2D, VectorField2D};
use crate::grid::TorusGrid;
use crate::holder::{holder_norm, HolderIndex};
use crate::ops;
use crate::spectral;

pub use diagnostics::{conserved_quantities, recover_pressure, Conserved};
pub use flow::{flow_map, FlowMap};
pub use forcing::{FieldPath, ForcingPath, ForcingTerm, TimeProfile};
pub use interp::InterpOrder;

/// Relative divergence tolerance for data declared divergence-free.
pub const DIV_FREE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    SemiLagrangian,
    SpectralReference,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    /// Upper bound on the time step.
    pub dt: f64,
    pub method: Method,
    /// Two-thirds dealiasing (spectral reference only).
    pub dealias: bool,
    pub interp: InterpOrder,
    /// Courant number: `dt ≤ cfl · h / max|w|`.
    pub cfl: f64,
    /// Abort when `sup|w|` exceeds this multiple of the data scale.
    pub blowup_factor: f64,
    /// Smallest admissible adaptive step.
    pub min_dt: f64,
    /// Keep every k-th step in the trajectory (the endpoint is always kept).
    pub record_every: usize,
    /// Fixed-point passes of the semi-Lagrangian predictor-corrector.
    pub corrector_passes: usize,
    /// Store pressure snapshots alongside the velocity.
    pub pressure: bool,
}

impl SolverConfig {
    pub fn new(grid: TorusGrid) -> Self {
        Self {
            grid,
            dt: 0.02,
            method: Method::SemiLagrangian,
            dealias: true,
            interp: InterpOrder::Cubic,
            cfl: 1.0,
            blowup_factor: 1e6,
            min_dt: 1e-10,
            record_every: 1,
            corrector_passes: 2,
            pressure: false,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.cfl > 0.0) || self.record_every == 0 {
            return Err(Error::InvalidInput("dt, cfl and record_every must be positive".into()));
        }
        Ok(())
    }
}

/// Datum `(u₀, z, f)` on `[0, T]`.
#[derive(Clone, Debug)]
pub struct Triple {
    pub u0: VectorField2D,
    pub z: Option<FieldPath>,
    pub f: ForcingPath,
    pub horizon: f64,
}

fn check_div_free(u: &VectorField2D) -> Result<()> {
    let div = u.max_divergence();
    let sup = u.sup_norm();
    if div > DIV_FREE_TOL * sup {
        return Err(Error::NotDivergenceFree { div, sup });
    }
    Ok(())
}

impl Triple {
    pub fn new(u0: VectorField2D, z: Option<FieldPath>, f: ForcingPath, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) {
            return Err(Error::OutOfRange { t: horizon, horizon });
        }
        check_div_free(&u0)?;
        if let Some(z) = &z {
            for node in z.nodes() {
                check_div_free(node)?;
                u0.grid().check_same(&node.grid())?;
            }
        }
        Ok(Self { u0, z, f, horizon })
    }

    /// Standard Euler data: `z ≡ 0`.
    pub fn unshifted(u0: VectorField2D, f: ForcingPath, horizon: f64) -> Result<Self> {
        Self::new(u0, None, f, horizon)
    }

    /// `‖u₀‖_{C^s} + ‖z‖_{W^{1,1}(J,C^s)} + ‖f‖_{L¹(J,C^s)}` with discrete norms.
    pub fn d_norm(&self, s: HolderIndex) -> f64 {
        let norm = |v: &VectorField2D| holder_norm(v, s);
        holder_norm(&self.u0, s)
            + self.z.as_ref().map_or(0.0, |z| z.w11_norm(&norm))
            + self.f.l1_norm(self.horizon, &norm)
    }

    pub fn shift_at(&self, t: f64) -> Option<VectorField2D> {
        self.z.as_ref().map(|z| z.value_at(t))
    }
}

/// Sampled solution `u(t_k)` with vorticity, shift `z(t_k)` and optional pressure.
#[derive(Clone, Debug)]
pub struct SolutionTrajectory {
    pub times: Vec<f64>,
    pub velocity: Vec<VectorField2D>,
    pub vorticity: Vec<ScalarField2D>,
    pub shift: Option<Vec<VectorField2D>>,
    pub pressure: Option<Vec<ScalarField2D>>,
}

impl SolutionTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn endpoint(&self) -> &VectorField2D {
        self.velocity.last().expect("non-empty trajectory")
    }

    /// Field `u + z` transporting the vorticity at sample `k`.
    pub fn transport_velocity(&self, k: usize) -> VectorField2D {
        match &self.shift {
            Some(z) => &self.velocity[k] + &z[k],
            None => self.velocity[k].clone(),
        }
    }
}

/// Vorticity source `∇⊥·F` and mean of `F`, precomputed per forcing term.
pub(crate) struct PreparedForcing {
    terms: Vec<PreparedTerm>,
}

struct PreparedTerm {
    profile: TimeProfile,
    curl: Vec<f64>,
    curl_spec: Vec<Complex64>,
    mean: (f64, f64),
}

pub(crate) struct Source<T> {
    pub vorticity: Vec<T>,
    pub mean: (f64, f64),
}

impl PreparedForcing {
    fn new(f: &ForcingPath) -> Self {
        let terms = f
            .terms()
            .iter()
            .map(|t| {
                let grid = t.field.grid();
                let curl_spec = spectral::curl(&grid, t.field.u1().spectrum(), t.field.u2().spectrum());
                let curl = spectral::plan(grid).inverse_real(&curl_spec);
                PreparedTerm { profile: t.profile.clone(), curl, curl_spec, mean: t.field.mean() }
            })
            .collect();
        Self { terms }
    }

    /// `∫_a^b ∇⊥·f dt` on the grid.
    pub fn impulse(&self, a: f64, b: f64) -> Option<Source<f64>> {
        let mut out: Option<Source<f64>> = None;
        for t in &self.terms {
            let w = t.profile.integral(a, b);
            if w == 0.0 {
                continue;
            }
            let s = out.get_or_insert_with(|| Source { vorticity: vec![0.0; t.curl.len()], mean: (0.0, 0.0) });
            for (o, c) in s.vorticity.iter_mut().zip(&t.curl) {
                *o += w * c;
            }
            s.mean.0 += w * t.mean.0;
            s.mean.1 += w * t.mean.1;
        }
        out
    }

    /// Spectrum of `∇⊥·f(t)` for a stage time `t` inside the step `[a, b]`.
    pub fn rate(&self, t: f64, a: f64, b: f64) -> Option<Source<Complex64>> {
        let mut out: Option<Source<Complex64>> = None;
        for term in &self.terms {
            let w = term.profile.value_in_step(t, a, b);
            if w == 0.0 {
                continue;
            }
            let s = out.get_or_insert_with(|| Source {
                vorticity: vec![Complex64::new(0.0, 0.0); term.curl_spec.len()],
                mean: (0.0, 0.0),
            });
            for (o, c) in s.vorticity.iter_mut().zip(&term.curl_spec) {
                *o += c * w;
            }
            s.mean.0 += w * term.mean.0;
            s.mean.1 += w * term.mean.1;
        }
        out
    }
}

pub(crate) trait Integrator {
    fn step(&mut self, t0: f64, t1: f64);
    fn velocity(&self) -> VectorField2D;
    fn vorticity(&self) -> ScalarField2D;
    fn max_speed(&self) -> f64;
}

struct RawTrajectory {
    times: Vec<f64>,
    velocity: Vec<VectorField2D>,
    vorticity: Vec<ScalarField2D>,
}

/// Standard Euler from `w0` with force `forcing` on `[0, horizon]`.
fn integrate_euler(
    w0: &VectorField2D,
    forcing: &ForcingPath,
    horizon: f64,
    config: &SolverConfig,
) -> Result<RawTrajectory> {
    config.validate()?;
    config.grid.check_same(&w0.grid())?;
    let prepared = PreparedForcing::new(forcing);
    let mut integrator: Box<dyn Integrator> = match config.method {
        Method::SemiLagrangian => Box::new(semi_lagrangian::SemiLagrangian::new(w0, prepared, config)),
        Method::SpectralReference => Box::new(spectral_ref::SpectralRk4::new(w0, prepared, config)),
    };

    let scale = w0.sup_norm() + forcing.l1_norm(horizon, &|v| v.sup_norm());
    let guard = config.blowup_factor * scale.max(f64::MIN_POSITIVE);

    let mut out = RawTrajectory {
        times: vec![0.0],
        velocity: vec![integrator.velocity()],
        vorticity: vec![integrator.vorticity()],
    };
    let mut stops = forcing.breakpoints(horizon);
    stops.push(horizon);
    let h = config.grid.spacing();
    let mut t = 0.0;
    let mut steps = 0usize;
    for &stop in &stops {
        while t < stop {
            let speed = integrator.max_speed();
            let dt_max = if speed > 0.0 { config.dt.min(config.cfl * h / speed) } else { config.dt };
            let remaining = stop - t;
            let nsub = ((remaining / dt_max) - 1e-9).ceil().max(1.0);
            let dt = remaining / nsub;
            if dt < config.min_dt {
                return Err(Error::CflViolation { t, dt });
            }
            let t1 = if nsub <= 1.0 { stop } else { t + dt };
            integrator.step(t, t1);
            t = t1;
            steps += 1;
            let norm = integrator.max_speed();
            if !norm.is_finite() || norm > guard {
                return Err(Error::Divergence { t, norm, guard });
            }
            if steps.is_multiple_of(config.record_every) || t >= horizon {
                out.times.push(t);
                out.velocity.push(integrator.velocity());
                out.vorticity.push(integrator.vorticity());
            }
        }
    }
    Ok(out)
}

/// Solves the Euler-type system for `triple`.
pub fn solve(triple: &Triple, config: &SolverConfig) -> Result<SolutionTrajectory> {
    let z0 = triple.shift_at(0.0);
    let w0 = match &z0 {
        Some(z) => &triple.u0 + z,
        None => triple.u0.clone(),
    };
    let forcing = match &triple.z {
        Some(z) => triple.f.plus(&z.derivative()),
        None => triple.f.clone(),
    };
    let raw = integrate_euler(&w0, &forcing, triple.horizon, config)?;

    let (velocity, vorticity, shift) = match &triple.z {
        None => (raw.velocity, raw.vorticity, None),
        Some(_) => {
            let shifts: Vec<VectorField2D> = raw.times.iter().map(|&t| triple.shift_at(t).unwrap()).collect();
            let velocity = raw.velocity.iter().zip(&shifts).map(|(w, z)| w - z).collect();
            let vorticity = raw
                .vorticity
                .iter()
                .zip(&shifts)
                .map(|(om, z)| om - &ops::curl2d(z))
                .collect();
            (velocity, vorticity, Some(shifts))
        }
    };
    let pressure = config.pressure.then(|| {
        raw.times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let zero = VectorField2D::zeros(config.grid);
                let z = shift.as_ref().map_or(&zero, |s| &s[k]);
                let f = triple.f.value_at(t).unwrap_or_else(|| zero.clone());
                recover_pressure(&velocity[k], z, &f)
            })
            .collect()
    });
    Ok(SolutionTrajectory { times: raw.times, velocity, vorticity, shift, pressure })
}

/// `R_T(u₀, f)`: the endpoint of standard Euler (`z ≡ 0`) with force `f`.
pub fn resolving_endpoint(
    u0: &VectorField2D,
    f_total: &ForcingPath,
    horizon: f64,
    config: &SolverConfig,
) -> Result<VectorField2D> {
    if horizon == 0.0 {
        return Ok(u0.clone());
    }
    let triple = Triple::unshifted(u0.clone(), f_total.clone(), horizon)?;
    let config = SolverConfig { record_every: usize::MAX, pressure: false, ..config.clone() };
    Ok(solve(&triple, &config)?.endpoint().clone())
}
