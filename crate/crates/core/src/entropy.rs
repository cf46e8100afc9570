//! ε-entropy estimates on finite metric clouds and the step-function ε-net
//! for balls of `W^{1,1}(0, 1)`.
//!
//! Packing is the computational primitive: a maximal ε-separated subset
//! `P(ε)` brackets the covering entropy as `ln P(2ε) ≤ H_ε ≤ ln P(ε)`.

use std::io::{Read, Write};

use num_bigint::BigUint;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holder::HolderFeatures;

/// Finite metric space stored as a dense symmetric distance matrix.
#[derive(Clone, Debug)]
pub struct MetricCloud {
    n: usize,
    dist: Vec<f64>,
    labels: Vec<String>,
}

/// Tolerance of the triangle-inequality spot check.
pub const TRIANGLE_TOL: f64 = 1e-9;

impl MetricCloud {
    /// Wraps a row-major `n × n` matrix, checking symmetry, a zero diagonal
    /// and non-negativity.
    pub fn from_matrix(n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::ShapeMismatch { expected: n * n, actual: dist.len() });
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if a != b || !(a >= 0.0) {
                    return Err(Error::InvalidInput(format!("entry ({i}, {j}) is not a symmetric distance")));
                }
            }
        }
        Ok(Self { n, dist, labels: (0..n).map(|i| i.to_string()).collect() })
    }

    /// Evaluates `d(i, j)` for `i < j` in parallel. The result does not depend
    /// on the thread count.
    pub fn from_fn(n: usize, d: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| ((i + 1)..n).map(|j| d(i, j)).collect()).collect();
        Self::from_rows(n, rows)
    }

    /// Cloud of feature sets under the discrete Hölder metric.
    pub fn from_features(features: &[HolderFeatures]) -> Self {
        let n = features.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| {
                ((i + 1)..n).map(|j| features[i].distance_with(&features[j], scratch)).collect()
            })
            .collect();
        Self::from_rows(n, rows)
    }

    /// Points of `ℝ^d` under the sup metric.
    pub fn from_points_sup(points: &[Vec<f64>]) -> Self {
        Self::from_fn(points.len(), |i, j| {
            points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
    }

    fn from_rows(n: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut dist = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                dist[i * n + j] = v;
                dist[j * n + i] = v;
            }
        }
        Self { n, dist, labels: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::ShapeMismatch { expected: self.n, actual: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.dist
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Median of the off-diagonal distances (0 for fewer than two points).
    pub fn median_distance(&self) -> f64 {
        let mut v: Vec<f64> = (0..self.n).flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j))).map(|(i, j)| self.distance(i, j)).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    /// Checks the triangle inequality on `trials` random triples.
    pub fn spot_check_triangle(&self, trials: usize, seed: u64) -> Result<()> {
        if self.n < 3 {
            return Ok(());
        }
        let mut rng = crate::rng::stream(seed, 0x7217, 0);
        for _ in 0..trials {
            let (a, b, c) = (rng.random_range(0..self.n), rng.random_range(0..self.n), rng.random_range(0..self.n));
            let lhs = self.distance(a, c);
            let rhs = self.distance(a, b) + self.distance(b, c);
            if lhs > rhs + TRIANGLE_TOL * rhs.max(1.0) {
                return Err(Error::InvalidInput(format!("triangle inequality fails at ({a}, {b}, {c})")));
            }
        }
        Ok(())
    }

    /// Distance matrix in the binary field layout.
    pub fn write_matrix<W: Write>(&self, w: &mut W) -> Result<()> {
        crate::io::write_matrix(w, self.n, &self.dist)
    }

    pub fn read_matrix<R: Read>(r: &mut R) -> Result<Self> {
        let (n, data) = crate::io::read_matrix(r)?;
        Self::from_matrix(n, data)
    }
}

/// Boundary behaviour of a [`lattice_cloud`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Points `i/(k−1)` of `[0, 1]`, absolute differences.
    Closed,
    /// Points `i/k` of the circle of length 1, circle distances.
    Periodic,
}

/// `k^dim` equally spaced points per axis under the sup metric.
pub fn lattice_cloud(k: usize, dim: u32, boundary: Boundary) -> MetricCloud {
    let n = k.pow(dim);
    let coord = |mut idx: usize| -> Vec<usize> {
        let mut c = vec![0; dim as usize];
        for slot in c.iter_mut().rev() {
            *slot = idx % k;
            idx /= k;
        }
        c
    };
    let axis = |a: usize, b: usize| -> f64 {
        let d = a.abs_diff(b);
        match boundary {
            Boundary::Closed => d as f64 / (k - 1) as f64,
            Boundary::Periodic => d.min(k - d) as f64 / k as f64,
        }
    };
    MetricCloud::from_fn(n, |i, j| {
        coord(i).iter().zip(coord(j)).map(|(&a, b)| axis(a, b)).fold(0.0, f64::max)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Packing {
    pub count: usize,
    pub representatives: Vec<usize>,
}

/// Greedy maximal ε-separated subset (pairwise distance `> ε`), scanning
/// points in index order.
pub fn greedy_packing(cloud: &MetricCloud, eps: f64) -> Packing {
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..cloud.len() {
        let row = &cloud.dist[i * cloud.n..(i + 1) * cloud.n];
        if reps.iter().all(|&r| row[r] > eps) {
            reps.push(i);
        }
    }
    Packing { count: reps.len(), representatives: reps }
}

/// Which ε values of a curve enter the slope fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FitWindow {
    /// Number of largest ε values dropped.
    pub exclude_largest: usize,
    /// Number of smallest ε values dropped.
    pub exclude_smallest: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { exclude_largest: 2, exclude_smallest: 2 }
    }
}

impl FitWindow {
    pub const ALL: FitWindow = FitWindow { exclude_largest: 0, exclude_smallest: 0 };
}

/// Minimum number of points in a slope fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub eps: f64,
    /// `P(ε)`: upper bracket `H_ε ≤ ln P(ε)`.
    pub packing: usize,
    /// `P(2ε)`: lower bracket `ln P(2ε) ≤ H_ε`.
    pub packing_2eps: usize,
}

impl EntropyPoint {
    pub fn ln_inv_eps(&self) -> f64 {
        -self.eps.ln()
    }

    pub fn ln_packing(&self) -> f64 {
        (self.packing as f64).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Fitted ε range `[eps_min, eps_max]`.
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyCurve {
    pub points: Vec<EntropyPoint>,
    pub fit: SlopeFit,
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, a, rms residual)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    (b, a, (rss / n).sqrt())
}

/// Entropy curve with the default fit window.
pub fn entropy_curve(cloud: &MetricCloud, eps_grid: &[f64]) -> Result<EntropyCurve> {
    entropy_curve_with(cloud, eps_grid, FitWindow::default())
}

/// Packing counts over a descending ε grid spanning at least one decade and
/// the least-squares slope of `ln P` against `ln(1/ε)` over `window`.
pub fn entropy_curve_with(cloud: &MetricCloud, eps_grid: &[f64], window: FitWindow) -> Result<EntropyCurve> {
    check_eps_grid(eps_grid)?;
    let points: Vec<EntropyPoint> = eps_grid
        .par_iter()
        .map(|&eps| EntropyPoint {
            eps,
            packing: greedy_packing(cloud, eps).count,
            packing_2eps: greedy_packing(cloud, 2.0 * eps).count,
        })
        .collect();
    let fit = fit_slope(&points, window)?;
    Ok(EntropyCurve { points, fit })
}

/// Slope fit over the points of `window`.
pub fn fit_slope(points: &[EntropyPoint], window: FitWindow) -> Result<SlopeFit> {
    let lo = window.exclude_largest;
    let hi = points.len().saturating_sub(window.exclude_smallest);
    if hi < lo + MIN_FIT_POINTS {
        return Err(Error::InvalidInput(format!(
            "fit window keeps {} of {} points, need {MIN_FIT_POINTS}",
            hi.saturating_sub(lo),
            points.len()
        )));
    }
    let used = &points[lo..hi];
    if used.iter().all(|p| p.packing == used[0].packing) {
        return Err(Error::DegenerateFit(format!("packing count {} constant over the fit window", used[0].packing)));
    }
    let x: Vec<f64> = used.iter().map(EntropyPoint::ln_inv_eps).collect();
    let y: Vec<f64> = used.iter().map(EntropyPoint::ln_packing).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
        eps_min: used.last().unwrap().eps,
        eps_max: used[0].eps,
        points: used.len(),
    })
}

fn check_eps_grid(eps: &[f64]) -> Result<()> {
    if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidInput("ε values must be positive".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("ε grid must be strictly descending".into()));
    }
    if eps.len() < 2 || eps[0] / eps[eps.len() - 1] < 10.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidInput("ε grid must span at least one decade".into()));
    }
    Ok(())
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && hi > lo && lo > 0.0);
    let (a, b) = (hi.ln(), lo.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// CSV with header `eps,packing,ln_inv_eps,ln_packing`.
pub fn write_curve_csv<W: Write>(w: W, curve: &EntropyCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["eps", "packing", "ln_inv_eps", "ln_packing"])?;
    for p in &curve.points {
        out.write_record(&[
            p.eps.to_string(),
            p.packing.to_string(),
            p.ln_inv_eps().to_string(),
            p.ln_packing().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Parameters of the step-function ε-net for the ball of radius `R` in
/// `W^{1,1}(0, 1)`: `L = ⌊2R/ε⌋ + 1` intervals and levels `2jR/M`,
/// `j = −M..=M`, with `M = ⌊4RL/ε⌋ + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct W11NetParams {
    pub radius: f64,
    pub eps: f64,
    pub intervals: u64,
    pub levels: u64,
}

pub fn w11_net_params(radius: f64, eps: f64) -> Result<W11NetParams> {
    if !(radius > 0.0) || !(eps > 0.0) || !radius.is_finite() || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("need R > 0 and ε > 0, got R = {radius}, ε = {eps}")));
    }
    let l = (2.0 * radius / eps).floor() as u64 + 1;
    let m = (4.0 * radius * l as f64 / eps).floor() as u64 + 1;
    let p = W11NetParams { radius, eps, intervals: l, levels: m };
    assert!(p.error_bound() <= eps, "net bound {} exceeds ε = {eps}", p.error_bound());
    Ok(p)
}

impl W11NetParams {
    /// `R/L + 2RL/M`.
    pub fn error_bound(&self) -> f64 {
        let (l, m) = (self.intervals as f64, self.levels as f64);
        self.radius / l + 2.0 * self.radius * l / m
    }

    /// `(2M + 1)^L`.
    pub fn cardinality(&self) -> BigUint {
        BigUint::from(2 * self.levels + 1).pow(self.intervals as u32)
    }

    /// `L · ln(2M + 1)`.
    pub fn ln_cardinality(&self) -> f64 {
        self.intervals as f64 * ((2 * self.levels + 1) as f64).ln()
    }

    /// Level value `2jR/M`.
    pub fn level(&self, j: i64) -> f64 {
        2.0 * j as f64 * self.radius / self.levels as f64
    }
}

/// Continuous piecewise-linear function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::ShapeMismatch { expected: knots.len().max(2), actual: values.len() });
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("knots must increase from 0 to 1".into()));
        }
        Ok(Self { knots, values })
    }

    pub fn constant(c: f64) -> Self {
        Self { knots: vec![0.0, 1.0], values: vec![c, c] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&s| s <= t).clamp(1, self.knots.len() - 1);
        let (a, b) = (self.knots[k - 1], self.knots[k]);
        let th = ((t - a) / (b - a)).clamp(0.0, 1.0);
        (1.0 - th) * self.values[k - 1] + th * self.values[k]
    }

    /// `∫₀¹ |u|`, exact.
    pub fn l1_norm(&self) -> f64 {
        self.l1_distance_to_steps(&[0.0, 1.0], &[0.0])
    }

    /// `∫₀¹ |u̇|`: the total variation.
    pub fn derivative_l1_norm(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn w11_norm(&self) -> f64 {
        self.l1_norm() + self.derivative_l1_norm()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { knots: self.knots.clone(), values: self.values.iter().map(|v| a * v).collect() }
    }

    /// `∫₀¹ |u − f|` for the step function `f = levels[k]` on
    /// `[breaks[k], breaks[k+1])`, computed exactly.
    pub fn l1_distance_to_steps(&self, breaks: &[f64], levels: &[f64]) -> f64 {
        let mut cuts: Vec<f64> = self.knots.iter().chain(breaks).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let k = breaks.partition_point(|&s| s <= mid).clamp(1, levels.len()) - 1;
            let c = levels[k];
            total += abs_linear_integral(self.eval(a) - c, self.eval(b) - c, b - a);
        }
        total
    }
}

/// `∫₀^len |p + (q − p)s/len| ds`.
fn abs_linear_integral(p: f64, q: f64, len: f64) -> f64 {
    if p * q >= 0.0 {
        0.5 * len * (p.abs() + q.abs())
    } else {
        0.5 * len * (p * p + q * q) / (p.abs() + q.abs())
    }
}

/// Net element chosen for `u`: level indices per interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantized {
    pub levels: Vec<i64>,
    pub values: Vec<f64>,
    pub breaks: Vec<f64>,
    /// `‖u − f‖_{L¹}`.
    pub error: f64,
}

/// Maps `u` in the closed `W^{1,1}` ball of radius `R` to the net element
/// equal on `[t_{k−1}, t_k)` to the level nearest to `u(t_{k−1})`.
pub fn w11_quantize(u: &PiecewiseLinear, params: &W11NetParams) -> Result<Quantized> {
    let norm = u.w11_norm();
    if norm > params.radius * (1.0 + 1e-12) {
        return Err(Error::OutOfBall { norm, radius: params.radius });
    }
    let l = params.intervals as usize;
    let m = params.levels as i64;
    let step = 2.0 * params.radius / params.levels as f64;
    let breaks: Vec<f64> = (0..=l).map(|k| k as f64 / l as f64).collect();
    let levels: Vec<i64> = breaks[..l].iter().map(|&t| ((u.eval(t) / step).round() as i64).clamp(-m, m)).collect();
    let values: Vec<f64> = levels.iter().map(|&j| params.level(j)).collect();
    let error = u.l1_distance_to_steps(&breaks, &values);
    Ok(Quantized { levels, values, breaks, error })
}

/// Random element of the `W^{1,1}` ball of radius `R`: Gaussian values at
/// `1..=max_pieces` random interior knots, rescaled to a norm `R·U`, `U`
/// uniform on `[0, 1]`.
pub fn sample_w11_ball(radius: f64, max_pieces: usize, rng: &mut impl Rng) -> PiecewiseLinear {
    let pieces = rng.random_range(1..=max_pieces.max(1));
    let mut knots: Vec<f64> = (1..pieces).map(|_| rng.random::<f64>()).collect();
    knots.push(0.0);
    knots.push(1.0);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let values: Vec<f64> = knots.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let u = PiecewiseLinear { knots, values };
    let norm = u.w11_norm();
    let target = radius * rng.random::<f64>();
    if norm > 0.0 {
        u.scaled(target / norm)
    } else {
        u
    }
}

/// Covering count `⌈R/ε⌉^n` of the sup-norm cube of radius `R` in `ℝⁿ`.
pub fn finite_dim_ball_entropy(n_dim: u32, radius: f64, eps: f64) -> Result<BigUint> {
    if n_dim == 0 || !(radius > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidInput("need n ≥ 1, R > 0, ε > 0".into()));
    }
    let side = (radius / eps).ceil() as u64;
    Ok(BigUint::from(side).pow(n_dim))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzImageRow {
    pub eps: f64,
    /// `P_f(ε)`, `P_f(2ε)`: packing of the image at `ε` and `2ε`.
    pub image_packing: usize,
    pub image_packing_2eps: usize,
    /// `P_K(ε/L)`: packing of the domain at `ε/L`.
    pub domain_packing: usize,
    /// `ln P_f(2ε) ≤ ln P_K(ε/L)`, the sandwich form of `H_ε(f(K)) ≤ H_{ε/L}(K)`.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzImageReport {
    pub lipschitz: f64,
    pub rows: Vec<LipschitzImageRow>,
    pub violations: usize,
}

/// Checks `H_ε(f(K)) ≤ H_{ε/L}(K)` at every ε via the packing sandwich:
/// a violation is reported only if the lower bracket of the left side
/// exceeds the upper bracket of the right side.
pub fn lipschitz_image_bound(
    domain: &MetricCloud,
    image: &MetricCloud,
    lipschitz: f64,
    eps_grid: &[f64],
) -> Result<LipschitzImageReport> {
    if domain.len() != image.len() {
        return Err(Error::ShapeMismatch { expected: domain.len(), actual: image.len() });
    }
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidInput("Lipschitz constant must be positive".into()));
    }
    let rows: Vec<LipschitzImageRow> = eps_grid
        .iter()
        .map(|&eps| {
            let image_packing = greedy_packing(image, eps).count;
            let image_packing_2eps = greedy_packing(image, 2.0 * eps).count;
            let domain_packing = greedy_packing(domain, eps / lipschitz).count;
            LipschitzImageRow {
                eps,
                image_packing,
                image_packing_2eps,
                domain_packing,
                holds: image_packing_2eps <= domain_packing,
            }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.holds).count();
    Ok(LipschitzImageReport { lipschitz, rows, violations })
}

/// Largest ratio `d(f(x), f(y)) / d(x, y)` over pairs with `d(x, y) > 0`.
pub fn empirical_lipschitz(domain: &MetricCloud, image: &MetricCloud) -> f64 {
    let n = domain.len();
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = domain.distance(i, j);
            if d > 0.0 {
                best = best.max(image.distance(i, j) / d);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> MetricCloud {
        MetricCloud::from_points_sup(&points.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    #[test]
    fn packing_examples() {
        let c = line(&[0.0, 1.0, 2.0]);
        assert_eq!(greedy_packing(&c, 0.6).count, 3);
        let p = greedy_packing(&c, 1.2);
        assert_eq!(p.representatives, vec![0, 2]);
        assert_eq!(greedy_packing(&c, 5.0).count, 1);
    }

    #[test]
    fn net_parameters() {
        let p = w11_net_params(1.0, 0.5).unwrap();
        assert_eq!((p.intervals, p.levels), (5, 41));
        assert_eq!(p.cardinality(), BigUint::from(83u32).pow(5));
        assert!((p.error_bound() - (0.2 + 10.0 / 41.0)).abs() < 1e-15);
        let p = w11_net_params(1.0, 1.0).unwrap();
        assert_eq!((p.intervals, p.levels), (3, 13));
        assert_eq!(p.cardinality(), BigUint::from(27u32).pow(3));
    }

    #[test]
    fn quantize_constant() {
        let p = w11_net_params(1.0, 0.5).unwrap();
        let q = w11_quantize(&PiecewiseLinear::constant(0.3), &p).unwrap();
        assert!(q.levels.iter().all(|&j| j == 6));
        assert!((q.values[0] - 12.0 / 41.0).abs() < 1e-15);
        assert!((q.error - (0.3 - 12.0 / 41.0)).abs() < 1e-14);
        let q = w11_quantize(&PiecewiseLinear::constant(0.0), &p).unwrap();
        assert!(q.levels.iter().all(|&j| j == 0) && q.error == 0.0);
        assert!(matches!(
            w11_quantize(&PiecewiseLinear::constant(1.5), &p),
            Err(Error::OutOfBall { .. })
        ));
    }

    #[test]
    fn exact_l1_with_sign_change() {
        // u(t) = 2t − 1 on [0, 1]: ∫|u| = 1/2, total variation 2.
        let u = PiecewiseLinear::new(vec![0.0, 1.0], vec![-1.0, 1.0]).unwrap();
        assert!((u.l1_norm() - 0.5).abs() < 1e-15);
        assert_eq!(u.derivative_l1_norm(), 2.0);
        // distance to the step f = −1 on [0, ½), 1 on [½, 1]: 2·∫₀^½ 2t dt = ½
        let d = u.l1_distance_to_steps(&[0.0, 0.5, 1.0], &[-1.0, 1.0]);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_dim_counts() {
        assert_eq!(finite_dim_ball_entropy(1, 1.0, 0.25).unwrap(), BigUint::from(4u32));
        assert_eq!(finite_dim_ball_entropy(2, 1.0, 0.25).unwrap(), BigUint::from(16u32));
    }

    #[test]
    fn identical_points_are_degenerate() {
        let c = line(&[0.5; 6]);
        let grid = log_grid(1.0, 0.01, 9);
        assert!(matches!(entropy_curve(&c, &grid), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn rejects_short_or_ascending_grids() {
        let c = line(&[0.0, 1.0]);
        assert!(entropy_curve(&c, &log_grid(1.0, 0.5, 9)).is_err());
        let mut g = log_grid(1.0, 0.01, 9);
        g.reverse();
        assert!(entropy_curve(&c, &g).is_err());
    }
}
