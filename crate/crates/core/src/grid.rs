use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform `n × n` grid on `[0, 2π)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2π / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Flat index of `(i1, i2)`; `i1` runs along `x₁` and is the slow index.
    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n + i2
    }

    /// Signed wavenumber of FFT bin `p` (Nyquist bin reported as `+n/2`).
    #[inline]
    pub fn wavenumber(&self, p: usize) -> i64 {
        let n = self.n as i64;
        let p = p as i64;
        if p <= n / 2 {
            p
        } else {
            p - n
        }
    }

    pub fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch(self.n, other.n));
        }
        Ok(())
    }
}

impl TryFrom<usize> for TorusGrid {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<TorusGrid> for usize {
    fn from(g: TorusGrid) -> usize {
        g.n
    }
}

/// Shortest distance between two angles on the circle of length `2π`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Geodesic distance on the flat torus `[0, 2π)²`.
pub fn torus_distance(x: (f64, f64), y: (f64, f64)) -> f64 {
    circle_distance(x.0, y.0).hypot(circle_distance(x.1, y.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::new(4).is_err());
        assert!(TorusGrid::new(48).is_err());
        assert!(TorusGrid::new(64).is_ok());
    }

    #[test]
    fn wavenumbers_are_signed() {
        let g = TorusGrid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|p| g.wavenumber(p)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn torus_distance_wraps() {
        let d = torus_distance((0.1, 0.0), (2.0 * PI - 0.1, 0.0));
        assert!((d - 0.2).abs() < 1e-12);
        assert!((circle_distance(0.0, PI) - PI).abs() < 1e-12);
    }
}
