//! Time-dependent forcing paths and piecewise-linear field paths.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::VectorField2D;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar time weight multiplying a forcing field.
#[derive(Clone)]
pub enum TimeProfile {
    /// Indicator of `[start, end)`.
    Interval { start: f64, end: f64 },
    /// Smooth profile `a(t)` together with a primitive `A' = a`.
    Smooth { value: ScalarFn, primitive: ScalarFn },
}

impl fmt::Debug for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeProfile::Interval { start, end } => write!(f, "Interval[{start}, {end})"),
            TimeProfile::Smooth { .. } => write!(f, "Smooth"),
        }
    }
}

impl TimeProfile {
    pub fn smooth(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        primitive: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TimeProfile::Smooth { value: Arc::new(value), primitive: Arc::new(primitive) }
    }

    /// `∫_a^b a(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            TimeProfile::Interval { start, end } => (b.min(*end) - a.max(*start)).max(0.0),
            TimeProfile::Smooth { primitive, .. } => primitive(b) - primitive(a),
        }
    }

    /// Profile value at `t` inside a step `[a, b]`. Interval profiles return
    /// their average over the step, which is exact when steps never straddle
    /// a breakpoint.
    pub fn value_in_step(&self, t: f64, a: f64, b: f64) -> f64 {
        match self {
            TimeProfile::Interval { .. } => self.integral(a, b) / (b - a),
            TimeProfile::Smooth { value, .. } => value(t),
        }
    }

    fn breakpoints(&self) -> Option<(f64, f64)> {
        match self {
            TimeProfile::Interval { start, end } => Some((*start, *end)),
            TimeProfile::Smooth { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForcingTerm {
    pub field: VectorField2D,
    pub profile: TimeProfile,
}

/// Forcing `f(t, x) = Σ a_i(t) F_i(x)`.
#[derive(Clone, Debug, Default)]
pub struct ForcingPath {
    terms: Vec<ForcingTerm>,
}

impl ForcingPath {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `f(t) = fields[k]` on `[breakpoints[k], breakpoints[k+1])`.
    pub fn piecewise_constant(breakpoints: &[f64], fields: Vec<VectorField2D>) -> Result<Self> {
        if breakpoints.len() != fields.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints for {} intervals",
                breakpoints.len(),
                fields.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("breakpoints must increase strictly".into()));
        }
        let terms = fields
            .into_iter()
            .enumerate()
            .map(|(k, field)| ForcingTerm {
                field,
                profile: TimeProfile::Interval { start: breakpoints[k], end: breakpoints[k + 1] },
            })
            .collect();
        Ok(Self { terms })
    }

    /// `f(t, x) = a(t) F(x)` with `a = value` and `A = primitive`.
    pub fn separable(
        field: VectorField2D,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        primitive: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { terms: vec![ForcingTerm { field, profile: TimeProfile::smooth(value, primitive) }] }
    }

    /// Time-independent forcing.
    pub fn steady(field: VectorField2D) -> Self {
        Self::separable(field, |_| 1.0, |t| t)
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Concatenation of the terms of `self` and `other` (sum of forces).
    pub fn plus(&self, other: &ForcingPath) -> ForcingPath {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ForcingPath { terms }
    }

    pub fn scaled(&self, c: f64) -> ForcingPath {
        ForcingPath {
            terms: self
                .terms
                .iter()
                .map(|t| ForcingTerm { field: t.field.scale(c), profile: t.profile.clone() })
                .collect(),
        }
    }

    /// Sorted, deduplicated interval endpoints inside `(0, horizon)`.
    pub fn breakpoints(&self, horizon: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .terms
            .iter()
            .filter_map(|t| t.profile.breakpoints())
            .flat_map(|(s, e)| [s, e])
            .filter(|&t| t > 0.0 && t < horizon)
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * horizon.max(1.0));
        b
    }

    /// `∫_a^b f(t) dt`, or `None` when the impulse vanishes identically.
    pub fn impulse(&self, a: f64, b: f64) -> Option<VectorField2D> {
        let mut coeffs = Vec::new();
        let mut fields = Vec::new();
        for t in &self.terms {
            let w = t.profile.integral(a, b);
            if w != 0.0 {
                coeffs.push(w);
                fields.push(t.field.clone());
            }
        }
        if fields.is_empty() {
            None
        } else {
            Some(VectorField2D::combination(&coeffs, &fields))
        }
    }

    /// Right-continuous value `f(t)`.
    pub fn value_at(&self, t: f64) -> Option<VectorField2D> {
        let mut coeffs = Vec::new();
        let mut fields = Vec::new();
        for term in &self.terms {
            let w = match &term.profile {
                TimeProfile::Interval { start, end } => {
                    if t >= *start && t < *end {
                        1.0
                    } else {
                        0.0
                    }
                }
                TimeProfile::Smooth { value, .. } => value(t),
            };
            if w != 0.0 {
                coeffs.push(w);
                fields.push(term.field.clone());
            }
        }
        (!fields.is_empty()).then(|| VectorField2D::combination(&coeffs, &fields))
    }

    /// `∫_0^T ‖f(t)‖ dt` for a field norm. Exact on segments where only
    /// interval terms are active; Simpson's rule with 16 panels elsewhere.
    pub fn l1_norm(&self, horizon: f64, norm: &dyn Fn(&VectorField2D) -> f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut mesh = vec![0.0];
        mesh.extend(self.breakpoints(horizon));
        mesh.push(horizon);
        let has_smooth = self.terms.iter().any(|t| matches!(t.profile, TimeProfile::Smooth { .. }));
        let eval = |t: f64| self.value_at(t).map_or(0.0, |f| norm(&f));
        let mut total = 0.0;
        for w in mesh.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !has_smooth {
                total += (b - a) * eval(0.5 * (a + b));
            } else {
                total += simpson(&eval, a, b, 16);
            }
        }
        total
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Continuous piecewise-linear path `t ↦ z(t)` through nodal fields.
#[derive(Clone, Debug)]
pub struct FieldPath {
    times: Vec<f64>,
    nodes: Vec<VectorField2D>,
}

impl FieldPath {
    pub fn new(times: Vec<f64>, nodes: Vec<VectorField2D>) -> Result<Self> {
        if times.len() != nodes.len() || times.len() < 2 {
            return Err(Error::InvalidInput("a field path needs ≥ 2 matching times and nodes".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("path times must increase strictly".into()));
        }
        let grid = nodes[0].grid();
        for n in &nodes {
            grid.check_same(&n.grid())?;
        }
        Ok(Self { times, nodes })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[VectorField2D] {
        &self.nodes
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Linear interpolation, constant extrapolation outside the node range.
    pub fn value_at(&self, t: f64) -> VectorField2D {
        if t <= self.times[0] {
            return self.nodes[0].clone();
        }
        let last = self.times.len() - 1;
        if t >= self.times[last] {
            return self.nodes[last].clone();
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let theta = (t - t0) / (t1 - t0);
        if theta == 0.0 {
            return self.nodes[k].clone();
        }
        VectorField2D::combination(&[1.0 - theta, theta], &self.nodes[k..k + 2])
    }

    /// The piecewise-constant derivative `ż`.
    pub fn derivative(&self) -> ForcingPath {
        let fields = self
            .times
            .windows(2)
            .zip(self.nodes.windows(2))
            .map(|(t, z)| (&z[1] - &z[0]).scale(1.0 / (t[1] - t[0])))
            .collect();
        ForcingPath::piecewise_constant(&self.times, fields).expect("validated path")
    }

    pub fn scaled(&self, c: f64) -> FieldPath {
        FieldPath { times: self.times.clone(), nodes: self.nodes.iter().map(|n| n.scale(c)).collect() }
    }

    /// `∫ ‖z(t)‖ dt` by Simpson's rule (4 panels per segment).
    pub fn l1_norm(&self, norm: &dyn Fn(&VectorField2D) -> f64) -> f64 {
        self.times
            .windows(2)
            .map(|w| simpson(&|t| norm(&self.value_at(t)), w[0], w[1], 4))
            .sum()
    }

    /// `‖z‖_{W^{1,1}} = ∫‖z‖ + ∫‖ż‖`.
    pub fn w11_norm(&self, norm: &dyn Fn(&VectorField2D) -> f64) -> f64 {
        self.l1_norm(norm) + self.derivative().l1_norm(self.end(), norm)
    }

    /// `max_k ‖z(t_k)‖`; the sup of the norm of a piecewise-linear path is
    /// attained at a node.
    pub fn sup_norm(&self, norm: &dyn Fn(&VectorField2D) -> f64) -> f64 {
        self.nodes.iter().map(norm).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn e(grid: TorusGrid) -> VectorField2D {
        VectorField2D::from_fn(grid, |_, y| (y.sin(), 0.0))
    }

    #[test]
    fn impulse_of_piecewise_constant_path() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ForcingPath::piecewise_constant(&[0.0, 0.5, 1.0], vec![e(grid), e(grid).scale(-2.0)]).unwrap();
        let i = f.impulse(0.25, 0.75).unwrap();
        assert!(i.sup_distance(&e(grid).scale(0.25 - 0.5)) < 1e-15);
        assert_eq!(f.breakpoints(1.0), vec![0.5]);
        let l1 = f.l1_norm(1.0, &|v| v.sup_norm());
        assert!((l1 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn separable_impulse_uses_primitive() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ForcingPath::separable(e(grid), f64::cos, f64::sin);
        let i = f.impulse(0.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(i.sup_distance(&e(grid)) < 1e-15);
        let l1 = f.l1_norm(std::f64::consts::PI, &|v| v.sup_norm());
        assert!((l1 - 2.0).abs() < 1e-4);
    }

    #[test]
    fn field_path_interpolates_and_differentiates() {
        let grid = TorusGrid::new(8).unwrap();
        let z = FieldPath::new(vec![0.0, 0.5, 1.0], vec![VectorField2D::zeros(grid), e(grid), VectorField2D::zeros(grid)]).unwrap();
        assert!(z.value_at(0.25).sup_distance(&e(grid).scale(0.5)) < 1e-15);
        let dz = z.derivative();
        assert!(dz.value_at(0.1).unwrap().sup_distance(&e(grid).scale(2.0)) < 1e-15);
        assert!((z.sup_norm(&|v| v.sup_norm()) - 1.0).abs() < 1e-15);
        // ∫|z| = 0.5 (triangle of height 1 on [0,1]); ∫|ż| = 2.
        assert!((z.w11_norm(&|v| v.sup_norm()) - 2.5).abs() < 1e-12);
    }
}
