//! Grid solution of the profile ODE `p'' = a p^2 + b p + c`.
//!
//! The solution is generally not elementary, so it is returned as a
//! grid-interpolated descriptor. Besides the values, the first three
//! derivative rows are tabulated (the second and third follow from the ODE
//! itself), which keeps interpolated derivatives at the accuracy the
//! residual certification needs.

use super::CatalogError;
use crate::expr::{FunctionDescriptor, GridInterp};

const BLOWUP_LIMIT: f64 = 1e8;

/// Classical RK4 for `p'' = quad·p^2 + lin·p + constant` with initial data
/// `p(x0) = p0`, `p'(x0) = dp0`, tabulated on `[x0, x1]` with a step no
/// larger than `step`.
pub fn solve_p(
    quad: f64,
    lin: f64,
    constant: f64,
    p0: f64,
    dp0: f64,
    x_range: (f64, f64),
    step: f64,
) -> Result<FunctionDescriptor, CatalogError> {
    let (x0, x1) = x_range;
    assert!(step > 0.0, "step must be positive");
    assert!(x1 > x0, "x range must be increasing");
    let n_steps = ((x1 - x0) / step).ceil().max(4.0) as usize;
    let h = (x1 - x0) / n_steps as f64;

    let accel = |p: f64| quad * p * p + lin * p + constant;

    let mut p = p0;
    let mut dp = dp0;
    let mut row_p = Vec::with_capacity(n_steps + 1);
    let mut row_dp = Vec::with_capacity(n_steps + 1);
    row_p.push(p);
    row_dp.push(dp);
    for i in 0..n_steps {
        let k1p = dp;
        let k1v = accel(p);
        let k2p = dp + 0.5 * h * k1v;
        let k2v = accel(p + 0.5 * h * k1p);
        let k3p = dp + 0.5 * h * k2v;
        let k3v = accel(p + 0.5 * h * k2p);
        let k4p = dp + h * k3v;
        let k4v = accel(p + h * k3p);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        dp += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !p.is_finite() || !dp.is_finite() || p.abs() > BLOWUP_LIMIT || dp.abs() > BLOWUP_LIMIT
        {
            return Err(CatalogError::ProfileBlowUp {
                x: x0 + h * (i + 1) as f64,
                limit: BLOWUP_LIMIT,
            });
        }
        row_p.push(p);
        row_dp.push(dp);
    }

    let row_ddp: Vec<f64> = row_p.iter().map(|&p| accel(p)).collect();
    let row_dddp: Vec<f64> = row_p
        .iter()
        .zip(&row_dp)
        .map(|(&p, &dp)| (2.0 * quad * p + lin) * dp)
        .collect();
    let grid = GridInterp::new(x0, h, vec![row_p, row_dp, row_ddp, row_dddp]);
    Ok(FunctionDescriptor::from_grid(grid, "x"))
}
