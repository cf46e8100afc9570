//! Periodic interpolation on the grid, in index coordinates.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpOrder {
    Linear,
    #[default]
    Cubic,
}

#[inline]
fn cubic_weights(a: f64) -> [f64; 4] {
    // Lagrange weights on the nodes −1, 0, 1, 2.
    let am1 = a - 1.0;
    let am2 = a - 2.0;
    let ap1 = a + 1.0;
    [
        -a * am1 * am2 / 6.0,
        ap1 * am1 * am2 / 2.0,
        -ap1 * a * am2 / 2.0,
        ap1 * a * am1 / 6.0,
    ]
}

#[inline]
fn split(x: f64, n: usize) -> (usize, f64) {
    let f = x.floor();
    let frac = x - f;
    ((f as i64).rem_euclid(n as i64) as usize, frac)
}

/// Value of a periodic grid function at fractional index `(x, y)`.
#[inline]
pub(crate) fn sample(values: &[f64], n: usize, order: InterpOrder, x: f64, y: f64) -> f64 {
    let (i, a) = split(x, n);
    let (j, b) = split(y, n);
    match order {
        InterpOrder::Linear => {
            let i1 = (i + 1) % n;
            let j1 = (j + 1) % n;
            let v00 = values[i * n + j];
            let v01 = values[i * n + j1];
            let v10 = values[i1 * n + j];
            let v11 = values[i1 * n + j1];
            (1.0 - a) * ((1.0 - b) * v00 + b * v01) + a * ((1.0 - b) * v10 + b * v11)
        }
        InterpOrder::Cubic => {
            let wa = cubic_weights(a);
            let wb = cubic_weights(b);
            let cols = [(j + n - 1) % n, j, (j + 1) % n, (j + 2) % n];
            let mut acc = 0.0;
            for (r, wr) in wa.iter().enumerate() {
                let row = ((i + n + r - 1) % n) * n;
                let mut s = 0.0;
                for (c, wc) in cols.iter().zip(&wb) {
                    s += wc * values[row + c];
                }
                acc += wr * s;
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_reproduce_nodes_and_cubics() {
        assert_eq!(cubic_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
        let w = cubic_weights(0.37);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let p = |x: f64| 2.0 - x + 0.5 * x * x - 0.25 * x * x * x;
        let interp: f64 = w.iter().zip([-1.0, 0.0, 1.0, 2.0]).map(|(w, x)| w * p(x)).sum();
        assert!((interp - p(0.37)).abs() < 1e-14);
    }

    #[test]
    fn grid_points_are_exact_and_wrap() {
        let n = 16;
        let values: Vec<f64> = (0..n * n).map(|k| (k as f64 * 0.37).sin()).collect();
        for order in [InterpOrder::Linear, InterpOrder::Cubic] {
            assert_eq!(sample(&values, n, order, 3.0, 5.0), values[3 * n + 5]);
            assert!((sample(&values, n, order, 3.0 + n as f64, -11.0) - values[3 * n + 5]).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_error_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let values: Vec<f64> = (0..n * n).map(|k| ((k / n) as f64 * h).sin()).collect();
            (0..50)
                .map(|m| {
                    let x = 0.1 + m as f64 * 0.137;
                    (sample(&values, n, InterpOrder::Cubic, x, 0.3) - (x * h).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
