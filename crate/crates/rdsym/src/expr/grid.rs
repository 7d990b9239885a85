//! Uniform-grid tabulated functions with cubic interpolation.
//!
//! `rows[k]` holds samples of the k-th derivative at the grid nodes. A value
//! of order `k` is interpolated by a cubic Hermite segment whenever the next
//! row is available (the row above supplies the segment slopes), and by a
//! 4-point Lagrange cubic otherwise. Both are 4th-order accurate in the grid
//! step, which is what lets ODE-defined functions enter residual checks
//! without losing the certification tolerance.

use super::EvalError;

#[derive(Debug, Clone)]
pub struct GridInterp {
    x0: f64,
    dx: f64,
    rows: Vec<Vec<f64>>,
}

impl GridInterp {
    /// `rows[0]` is required; all rows must share a length of at least 4.
    pub fn new(x0: f64, dx: f64, rows: Vec<Vec<f64>>) -> Self {
        assert!(dx > 0.0, "grid step must be positive");
        assert!(!rows.is_empty(), "need at least the value row");
        let n = rows[0].len();
        assert!(n >= 4, "need at least 4 grid nodes");
        assert!(rows.iter().all(|r| r.len() == n), "rows must have equal length");
        Self { x0, dx, rows }
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.dx * (self.rows[0].len() - 1) as f64)
    }

    pub fn step(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, order: usize) -> Option<&[f64]> {
        self.rows.get(order).map(|r| r.as_slice())
    }

    fn locate(&self, x: f64) -> Result<(usize, f64), EvalError> {
        let n = self.rows[0].len();
        let (lo, hi) = self.x_range();
        // allow a hair of roundoff slop at the ends
        let slack = 1e-9 * self.dx;
        if x < lo - slack || x > hi + slack {
            return Err(EvalError::OutsideGrid { value: x, lo, hi });
        }
        let mut cell = ((x - self.x0) / self.dx).floor() as isize;
        cell = cell.clamp(0, n as isize - 2);
        let i = cell as usize;
        let s = (x - (self.x0 + self.dx * i as f64)) / self.dx;
        Ok((i, s))
    }

    /// Interpolated value of the `order`-th derivative at `x`.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64, EvalError> {
        let row = self
            .rows
            .get(order)
            .ok_or(EvalError::Order(order.min(u8::MAX as usize) as u8))?;
        let (i, s) = self.locate(x)?;
        if let Some(slopes) = self.rows.get(order + 1) {
            // Hermite cubic on [x_i, x_{i+1}] using tabulated slopes.
            let f0 = row[i];
            let f1 = row[i + 1];
            let m0 = slopes[i] * self.dx;
            let m1 = slopes[i + 1] * self.dx;
            let s2 = s * s;
            let s3 = s2 * s;
            Ok((2.0 * s3 - 3.0 * s2 + 1.0) * f0
                + (s3 - 2.0 * s2 + s) * m0
                + (-2.0 * s3 + 3.0 * s2) * f1
                + (s3 - s2) * m1)
        } else {
            // Lagrange cubic through the 4 nodes surrounding the cell.
            let n = row.len();
            let j = i.saturating_sub(1).min(n - 4);
            let u = (x - (self.x0 + self.dx * j as f64)) / self.dx;
            let mut acc = 0.0;
            for (k, &fk) in row[j..j + 4].iter().enumerate() {
                let mut w = 1.0;
                for m in 0..4 {
                    if m != k {
                        w *= (u - m as f64) / (k as f64 - m as f64);
                    }
                }
                acc += w * fk;
            }
            Ok(acc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_grid() -> GridInterp {
        // rows for sin(x): value, first, second, third derivative
        let n = 401;
        let dx = 0.005;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();
        GridInterp::new(
            0.0,
            dx,
            vec![
                xs.iter().map(|x| x.sin()).collect(),
                xs.iter().map(|x| x.cos()).collect(),
                xs.iter().map(|x| -x.sin()).collect(),
                xs.iter().map(|x| -x.cos()).collect(),
            ],
        )
    }

    #[test]
    fn hermite_value_accuracy() {
        let g = sample_grid();
        for i in 0..200 {
            let x = 0.0025 + i as f64 * 0.00997;
            assert!((g.eval(x, 0).unwrap() - x.sin()).abs() < 1e-11);
            assert!((g.eval(x, 1).unwrap() - x.cos()).abs() < 1e-11);
            assert!((g.eval(x, 2).unwrap() + x.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn lagrange_fallback() {
        let n = 81;
        let dx = 0.025;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();
        let g = GridInterp::new(0.0, dx, vec![xs.iter().map(|x| x.exp()).collect()]);
        for i in 0..50 {
            let x = 0.01 + i as f64 * 0.039;
            assert!((g.eval(x, 0).unwrap() - x.exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let g = sample_grid();
        assert!(matches!(g.eval(-0.5, 0), Err(EvalError::OutsideGrid { .. })));
        assert!(matches!(g.eval(9.0, 0), Err(EvalError::OutsideGrid { .. })));
    }
}
