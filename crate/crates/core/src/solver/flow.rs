use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;

use super::interp::{self, InterpOrder};
use super::SolutionTrajectory;

/// Back-traced positions `U_{τ,t}(x)`: where the particle found at `x` at
/// time `t` was at time `τ`. Stored as an unwrapped displacement field.
#[derive(Clone, Debug)]
pub struct FlowMap {
    grid: TorusGrid,
    pub from: f64,
    pub to: f64,
    disp1: Vec<f64>,
    disp2: Vec<f64>,
}

impl FlowMap {
    pub fn identity(grid: TorusGrid, t: f64) -> Self {
        Self { grid, from: t, to: t, disp1: vec![0.0; grid.len()], disp2: vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Position wrapped to `[0, 2π)²` for grid point `(i1, i2)`.
    pub fn position(&self, i1: usize, i2: usize) -> (f64, f64) {
        let k = self.grid.index(i1, i2);
        (
            (self.grid.coord(i1) + self.disp1[k]).rem_euclid(2.0 * PI),
            (self.grid.coord(i2) + self.disp2[k]).rem_euclid(2.0 * PI),
        )
    }

    /// Unwrapped displacement `U(x) − x` at grid point `(i1, i2)`.
    pub fn displacement(&self, i1: usize, i2: usize) -> (f64, f64) {
        let k = self.grid.index(i1, i2);
        (self.disp1[k], self.disp2[k])
    }

    /// `self ∘ inner`, i.e. `U_{τ,σ} ∘ U_{σ,t} = U_{τ,t}` for
    /// `self = U_{τ,σ}` and `inner = U_{σ,t}`.
    pub fn compose(&self, inner: &FlowMap) -> FlowMap {
        let n = self.grid.n();
        let h = self.grid.spacing();
        let mut d1 = vec![0.0; n * n];
        let mut d2 = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let y1 = i as f64 + inner.disp1[k] / h;
                let y2 = j as f64 + inner.disp2[k] / h;
                d1[k] = inner.disp1[k] + interp::sample(&self.disp1, n, InterpOrder::Cubic, y1, y2);
                d2[k] = inner.disp2[k] + interp::sample(&self.disp2, n, InterpOrder::Cubic, y1, y2);
            }
        }
        FlowMap { grid: self.grid, from: self.from, to: inner.to, disp1: d1, disp2: d2 }
    }

    /// Largest torus distance between the positions of two maps.
    pub fn max_distance(&self, other: &FlowMap) -> f64 {
        let n = self.grid.n();
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                m = m.max(crate::grid::torus_distance(self.position(i, j), other.position(i, j)));
            }
        }
        m
    }
}

/// Midpoint sub-steps per trajectory sample interval.
const SUBSTEPS: usize = 2;

/// Back-traces the characteristics of the transporting field `u + z` of
/// `traj` from time `t` to time `τ`, with the midpoint rule, periodic cubic
/// interpolation in space and linear interpolation in time between samples.
pub fn flow_map(traj: &SolutionTrajectory, tau: f64, t: f64) -> Result<FlowMap> {
    let horizon = traj.horizon();
    let tol = 1e-12 * horizon.max(1.0);
    if traj.is_empty() || !(tau >= -tol && tau <= t && t <= horizon + tol) {
        return Err(Error::OutOfRange { t: if tau > t { tau } else { t }, horizon });
    }
    let grid = traj.velocity[0].grid();
    let mut map = FlowMap::identity(grid, t);
    map.from = tau;
    if tau == t {
        return Ok(map);
    }
    let n = grid.n();
    let h = grid.spacing();
    let fields: Vec<(Vec<f64>, Vec<f64>)> = (0..traj.len())
        .map(|k| {
            let v = traj.transport_velocity(k);
            (v.u1().values().to_vec(), v.u2().values().to_vec())
        })
        .collect();
    // velocity (in index units) at time s and index position (x, y)
    let vel_at = |s: f64, x: f64, y: f64| -> (f64, f64) {
        let k = traj.times.partition_point(|&q| q <= s).clamp(1, traj.len().max(2) - 1);
        let (ta, tb) = (traj.times[k - 1], traj.times[k]);
        let theta = if tb > ta { ((s - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (&fields[k - 1], &fields[k]);
        let va = (
            interp::sample(&a.0, n, InterpOrder::Cubic, x, y),
            interp::sample(&a.1, n, InterpOrder::Cubic, x, y),
        );
        let vb = (
            interp::sample(&b.0, n, InterpOrder::Cubic, x, y),
            interp::sample(&b.1, n, InterpOrder::Cubic, x, y),
        );
        (((1.0 - theta) * va.0 + theta * vb.0) / h, ((1.0 - theta) * va.1 + theta * vb.1) / h)
    };

    if traj.len() == 1 {
        return Err(Error::OutOfRange { t, horizon });
    }
    // Step boundaries: sample times inside (τ, t), walked backwards.
    let mut marks: Vec<f64> = traj.times.iter().copied().filter(|&s| s > tau && s < t).collect();
    marks.insert(0, tau);
    marks.push(t);
    let mut x1: Vec<f64> = (0..n * n).map(|k| (k / n) as f64).collect();
    let mut x2: Vec<f64> = (0..n * n).map(|k| (k % n) as f64).collect();
    for w in marks.windows(2).rev() {
        let (a, b) = (w[0], w[1]);
        let dt = (b - a) / SUBSTEPS as f64;
        for m in 0..SUBSTEPS {
            let s1 = b - m as f64 * dt;
            let sm = s1 - 0.5 * dt;
            for k in 0..n * n {
                let v = vel_at(s1, x1[k], x2[k]);
                let (pm1, pm2) = (x1[k] - 0.5 * dt * v.0, x2[k] - 0.5 * dt * v.1);
                let vm = vel_at(sm, pm1, pm2);
                x1[k] -= dt * vm.0;
                x2[k] -= dt * vm.1;
            }
        }
    }
    for k in 0..n * n {
        map.disp1[k] = (x1[k] - (k / n) as f64) * h;
        map.disp2[k] = (x2[k] - (k % n) as f64) * h;
    }
    Ok(map)
}
