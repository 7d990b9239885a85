//! Reduction of an invariant system to ODE profiles and back.
//!
//! The first four catalog entries have closed-form ansätze, e.g.
//! `u = φ(x) e^(t/alpha)`, `v = ψ(x) e^(t/beta)` for entry 1, which collapse
//! the PDE system to a second-order ODE system in the profiles (φ, ψ). This
//! module builds those ansätze, evaluates the reduced right-hand sides,
//! integrates them with classical RK4, and lifts the integrated profiles
//! back to (u, v)(t, x) while measuring both the PDE residuals and the
//! invariance defects `Q(u)`, `Q(v)`.
//!
//! Entries beyond 4 reduce the same way but their profiles involve the
//! ODE-defined `p(x)`; supply your own [`AnsatzMap`] and right-hand side for
//! those, and [`lift_and_check`] will still certify the result.

use std::io::Write;

use thiserror::Error;

use crate::catalog::{zero2, CatalogError, SymmetryOperator};
use crate::expr::{fractional_pow, EvalError, Field, FunctionDescriptor};
use crate::kirchhoff::RDSystem;
use crate::detsys::{DetsysError, ResidualReport};

#[derive(Debug, Clone, Error)]
pub enum ReduceError {
    #[error("no built-in ansatz for case {0}; supply a custom AnsatzMap")]
    UnsupportedCase(u8),
    #[error("restriction {0} violated")]
    Restriction(&'static str),
    #[error("integration blew up at x = {x}")]
    BlowUp { x: f64 },
    #[error("domain error at x = {x}: {source}")]
    MidIntegration { x: f64, source: EvalError },
    #[error("check grid [{want_lo}, {want_hi}] not covered by profile [{lo}, {hi}]")]
    ProfileRange { lo: f64, hi: f64, want_lo: f64, want_hi: f64 },
    #[error("profile needs at least {0} nodes")]
    TooFewNodes(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Operator(#[from] CatalogError),
    #[error(transparent)]
    Residual(#[from] DetsysError),
}

/// Maps between profile variables and PDE variables. `lift*` take the
/// profile values (and slopes/curvatures where needed) at one x; all
/// derivatives are with respect to the PDE coordinates.
pub trait AnsatzMap {
    fn lift(&self, phi: f64, psi: f64, t: f64, x: f64) -> (f64, f64);
    /// Time derivatives (u_t, v_t) of the lifted pair.
    fn lift_dt(&self, phi: f64, psi: f64, t: f64, x: f64) -> (f64, f64);
    /// Space derivatives (u_x, v_x) given the profile slopes.
    fn lift_dx(&self, dphi: f64, dpsi: f64, t: f64, x: f64) -> (f64, f64);
    /// Second space derivatives (u_xx, v_xx) given the profile curvatures.
    fn lift_dxx(&self, ddphi: f64, ddpsi: f64, t: f64, x: f64) -> (f64, f64);
    /// Inverse projection (u, v, t, x) -> (φ, ψ).
    fn project(&self, u: f64, v: f64, t: f64, x: f64) -> (f64, f64);
    /// The generating operator (used for the invariance checks).
    fn operator(&self) -> &SymmetryOperator;
}

/// Built-in ansatz for catalog entries 1-4.
#[derive(Debug, Clone)]
pub struct Ansatz {
    case_id: u8,
    alpha: f64,
    beta: f64,
    operator: SymmetryOperator,
}

fn coeff(field: Field) -> FunctionDescriptor {
    FunctionDescriptor::from_field(field, &["t", "x"])
}

fn exp_t(rate: f64) -> Field {
    (Field::konst(rate) * Field::coord(0)).exp()
}

impl Ansatz {
    /// `case_id` must be 1..=4; `beta` is ignored by cases 2 and 3 and
    /// `alpha` by case 4.
    pub fn builtin(case_id: u8, alpha: f64, beta: f64) -> Result<Self, ReduceError> {
        let tfun = |f: Field| FunctionDescriptor::from_field(f, &["t"]);
        let zero_x = FunctionDescriptor::constant(0.0, &["x"]);
        let operator = match case_id {
            1 => {
                if alpha * beta == 0.0 {
                    return Err(ReduceError::Restriction("alpha*beta != 0"));
                }
                SymmetryOperator::new(
                    tfun(exp_t(1.0)),
                    zero_x,
                    coeff(Field::konst(1.0 / alpha) * exp_t(1.0)),
                    zero2(),
                    zero2(),
                    coeff(Field::konst(1.0 / beta) * exp_t(1.0)),
                    zero2(),
                )?
            }
            2 => {
                if alpha == 0.0 {
                    return Err(ReduceError::Restriction("alpha != 0"));
                }
                SymmetryOperator::new(
                    tfun(exp_t(alpha)),
                    zero_x,
                    coeff(exp_t(alpha)),
                    zero2(),
                    zero2(),
                    zero2(),
                    coeff(Field::konst(alpha) * exp_t(alpha)),
                )?
            }
            3 => {
                if alpha == 0.0 {
                    return Err(ReduceError::Restriction("alpha != 0"));
                }
                SymmetryOperator::new(
                    tfun(exp_t(alpha)),
                    zero_x,
                    zero2(),
                    coeff(exp_t(alpha)),
                    zero2(),
                    zero2(),
                    coeff(Field::konst(alpha) * exp_t(alpha)),
                )?
            }
            4 => {
                if beta == 0.0 {
                    return Err(ReduceError::Restriction("beta != 0"));
                }
                SymmetryOperator::new(
                    tfun(exp_t(1.0)),
                    zero_x,
                    zero2(),
                    coeff(exp_t(1.0)),
                    zero2(),
                    coeff(Field::konst(1.0 / beta) * exp_t(1.0)),
                    zero2(),
                )?
            }
            other => return Err(ReduceError::UnsupportedCase(other)),
        };
        Ok(Self { case_id, alpha, beta, operator })
    }

    pub fn case_id(&self) -> u8 {
        self.case_id
    }

    /// The invariant combination of (φ, ψ) that feeds `f` and `g` in the
    /// reduced system.
    pub fn omega(&self, phi: f64, psi: f64) -> Result<f64, EvalError> {
        match self.case_id {
            1 => Ok(fractional_pow(phi, -self.alpha)? * fractional_pow(psi, self.beta)?),
            2 => Ok(fractional_pow(phi, -self.alpha)? * psi.exp()),
            3 => Ok(psi - self.alpha * phi),
            4 => Ok(fractional_pow(psi, self.beta)? * (-phi).exp()),
            _ => unreachable!(),
        }
    }
}

impl AnsatzMap for Ansatz {
    fn lift(&self, phi: f64, psi: f64, t: f64, _x: f64) -> (f64, f64) {
        match self.case_id {
            1 => (phi * (t / self.alpha).exp(), psi * (t / self.beta).exp()),
            2 => (phi * t.exp(), psi + self.alpha * t),
            3 => (phi + t, psi + self.alpha * t),
            4 => (phi + t, psi * (t / self.beta).exp()),
            _ => unreachable!(),
        }
    }

    fn lift_dt(&self, phi: f64, psi: f64, t: f64, x: f64) -> (f64, f64) {
        let (u, v) = self.lift(phi, psi, t, x);
        match self.case_id {
            1 => (u / self.alpha, v / self.beta),
            2 => (u, self.alpha),
            3 => (1.0, self.alpha),
            4 => (1.0, v / self.beta),
            _ => unreachable!(),
        }
    }

    fn lift_dx(&self, dphi: f64, dpsi: f64, t: f64, _x: f64) -> (f64, f64) {
        match self.case_id {
            1 => (dphi * (t / self.alpha).exp(), dpsi * (t / self.beta).exp()),
            2 => (dphi * t.exp(), dpsi),
            3 => (dphi, dpsi),
            4 => (dphi, dpsi * (t / self.beta).exp()),
            _ => unreachable!(),
        }
    }

    fn lift_dxx(&self, ddphi: f64, ddpsi: f64, t: f64, x: f64) -> (f64, f64) {
        // all four ansätze are linear in the profiles
        self.lift_dx(ddphi, ddpsi, t, x)
    }

    fn project(&self, u: f64, v: f64, t: f64, _x: f64) -> (f64, f64) {
        match self.case_id {
            1 => (u * (-t / self.alpha).exp(), v * (-t / self.beta).exp()),
            2 => (u * (-t).exp(), v - self.alpha * t),
            3 => (u - t, v - self.alpha * t),
            4 => (u - t, v * (-t / self.beta).exp()),
            _ => unreachable!(),
        }
    }

    fn operator(&self) -> &SymmetryOperator {
        &self.operator
    }
}

/// Right-hand side (φ'', ψ'') of a reduced system.
pub trait ProfileRhs {
    fn eval(&self, x: f64, phi: f64, psi: f64) -> Result<(f64, f64), EvalError>;
}

/// The reduced right-hand sides of the four built-in ansätze:
/// case 1: φ'' = φ f(w), ψ'' = ψ g(w); case 2: φ'' = φ f(w), ψ'' = g(w);
/// case 3: φ'' = f(w), ψ'' = g(w); case 4: φ'' = f(w), ψ'' = ψ g(w);
/// where w is the case's invariant combination.
#[derive(Debug, Clone)]
pub struct ReducedRhs {
    ansatz: Ansatz,
    f: FunctionDescriptor,
    g: FunctionDescriptor,
}

impl ReducedRhs {
    pub fn new(
        ansatz: &Ansatz,
        f: FunctionDescriptor,
        g: FunctionDescriptor,
    ) -> Result<Self, ReduceError> {
        if f.arity() != 1 || g.arity() != 1 {
            return Err(ReduceError::Restriction("f and g must be univariate"));
        }
        Ok(Self { ansatz: ansatz.clone(), f, g })
    }
}

impl ProfileRhs for ReducedRhs {
    fn eval(&self, _x: f64, phi: f64, psi: f64) -> Result<(f64, f64), EvalError> {
        let w = self.ansatz.omega(phi, psi)?;
        let fv = self.f.eval1(w)?;
        let gv = self.g.eval1(w)?;
        Ok(match self.ansatz.case_id {
            1 => (phi * fv, psi * gv),
            2 => (phi * fv, gv),
            3 => (fv, gv),
            4 => (fv, psi * gv),
            _ => unreachable!(),
        })
    }
}

/// Adapter so closures can serve as reduced right-hand sides.
pub struct FnRhs<F>(pub F);

impl<F> ProfileRhs for FnRhs<F>
where
    F: Fn(f64, f64, f64) -> Result<(f64, f64), EvalError>,
{
    fn eval(&self, x: f64, phi: f64, psi: f64) -> Result<(f64, f64), EvalError> {
        (self.0)(x, phi, psi)
    }
}

/// Integrated profiles on a uniform grid.
#[derive(Debug, Clone)]
pub struct ReducedProfile {
    pub xs: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    /// The reduction invariant along the profile, when an ansatz is attached.
    pub omega: Option<Vec<f64>>,
}

impl ReducedProfile {
    pub fn step(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Fills the invariant column from the given ansatz.
    pub fn with_omega(mut self, ansatz: &Ansatz) -> Result<Self, EvalError> {
        let mut om = Vec::with_capacity(self.xs.len());
        for i in 0..self.xs.len() {
            om.push(ansatz.omega(self.phi[i], self.psi[i])?);
        }
        self.omega = Some(om);
        Ok(self)
    }

    /// CSV with header `x,phi,psi,dphi,dpsi`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,phi,psi,dphi,dpsi")?;
        for i in 0..self.xs.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.xs[i], self.phi[i], self.psi[i], self.dphi[i], self.dpsi[i]
            )?;
        }
        Ok(())
    }
}

const BLOWUP_LIMIT: f64 = 1e8;

/// Classical RK4 for the 4-dimensional first-order form of the reduced
/// system. Initial conditions are `[φ0, φ'0, ψ0, ψ'0]` at `x_range.0`.
pub fn integrate_reduced(
    rhs: &dyn ProfileRhs,
    ic: [f64; 4],
    x_range: (f64, f64),
    step: f64,
) -> Result<ReducedProfile, ReduceError> {
    let (x0, x1) = x_range;
    if !(step > 0.0) || !(x1 > x0) {
        return Err(ReduceError::Restriction("step > 0 and x1 > x0"));
    }
    let n_steps = ((x1 - x0) / step).ceil().max(4.0) as usize;
    let h = (x1 - x0) / n_steps as f64;
    let mut y = ic;
    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut phi = Vec::with_capacity(n_steps + 1);
    let mut dphi = Vec::with_capacity(n_steps + 1);
    let mut psi = Vec::with_capacity(n_steps + 1);
    let mut dpsi = Vec::with_capacity(n_steps + 1);
    let push = |xs: &mut Vec<f64>,
                phi: &mut Vec<f64>,
                dphi: &mut Vec<f64>,
                psi: &mut Vec<f64>,
                dpsi: &mut Vec<f64>,
                x: f64,
                y: &[f64; 4]| {
        xs.push(x);
        phi.push(y[0]);
        dphi.push(y[1]);
        psi.push(y[2]);
        dpsi.push(y[3]);
    };
    push(&mut xs, &mut phi, &mut dphi, &mut psi, &mut dpsi, x0, &y);

    let deriv = |x: f64, y: &[f64; 4]| -> Result<[f64; 4], ReduceError> {
        let (ddphi, ddpsi) = rhs
            .eval(x, y[0], y[2])
            .map_err(|source| ReduceError::MidIntegration { x, source })?;
        Ok([y[1], ddphi, y[3], ddpsi])
    };
    let add = |y: &[f64; 4], k: &[f64; 4], c: f64| -> [f64; 4] {
        [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]]
    };

    for i in 0..n_steps {
        let x = x0 + h * i as f64;
        let k1 = deriv(x, &y)?;
        let k2 = deriv(x + 0.5 * h, &add(&y, &k1, 0.5 * h))?;
        let k3 = deriv(x + 0.5 * h, &add(&y, &k2, 0.5 * h))?;
        let k4 = deriv(x + h, &add(&y, &k3, h))?;
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let xn = x0 + h * (i + 1) as f64;
        if y.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP_LIMIT) {
            return Err(ReduceError::BlowUp { x: xn });
        }
        push(&mut xs, &mut phi, &mut dphi, &mut psi, &mut dpsi, xn, &y);
    }
    Ok(ReducedProfile { xs, phi, dphi, psi, dpsi, omega: None })
}

/// Finite-difference weights for the `deriv`-th derivative at `at`, exact on
/// polynomials up to degree `offsets.len() - 1` (solved from the Vandermonde
/// moment conditions).
fn fd_weights(offsets: &[f64], at: f64, deriv: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (k, row) in a.iter_mut().enumerate() {
        for (j, off) in offsets.iter().enumerate() {
            row[j] = (off - at).powi(k as i32);
        }
        row[n] = if k == deriv {
            (1..=deriv).product::<usize>() as f64
        } else {
            0.0
        };
    }
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        for j in col..=n {
            a[col][j] /= p;
        }
        for row in 0..n {
            if row != col {
                let factor = a[row][col];
                for j in col..=n {
                    a[row][j] -= factor * a[col][j];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n]).collect()
}

/// Second-derivative samples of a gridded function: 5-point central stencils
/// inside, 6-point one-sided stencils at the edges (both 4th order).
pub(crate) fn second_derivative_row(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 6, "need at least 6 nodes for the boundary stencils");
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        out[i] = (-values[i - 2] + 16.0 * values[i - 1] - 30.0 * values[i]
            + 16.0 * values[i + 1]
            - values[i + 2])
            / (12.0 * h * h);
    }
    let offsets: Vec<f64> = (0..6).map(|j| j as f64).collect();
    for i in [0usize, 1] {
        let w = fd_weights(&offsets, i as f64, 2);
        out[i] = w.iter().zip(&values[0..6]).map(|(w, v)| w * v).sum::<f64>() / (h * h);
    }
    for i in [n - 2, n - 1] {
        let w = fd_weights(&offsets, (i - (n - 6)) as f64, 2);
        out[i] = w.iter().zip(&values[n - 6..n]).map(|(w, v)| w * v).sum::<f64>() / (h * h);
    }
    out
}

/// Lifts an integrated profile through the ansatz over a (t, x) rectangle
/// and reports the PDE residuals of the transformed system alongside the
/// invariance defects `Q(u)`, `Q(v)`.
///
/// The x-samples are the profile nodes inside `x_range` (profile curvature
/// comes from 4th-order stencils on the profile grid); `nt` time levels are
/// spread uniformly over `t_range`.
pub fn lift_and_check(
    ansatz: &dyn AnsatzMap,
    profile: &ReducedProfile,
    sys: &RDSystem,
    t_range: (f64, f64),
    nt: usize,
    x_range: (f64, f64),
) -> Result<ResidualReport, ReduceError> {
    let (plo, phi_hi) = profile.x_range();
    if x_range.0 < plo - 1e-12 || x_range.1 > phi_hi + 1e-12 {
        return Err(ReduceError::ProfileRange {
            lo: plo,
            hi: phi_hi,
            want_lo: x_range.0,
            want_hi: x_range.1,
        });
    }
    if profile.xs.len() < 6 {
        return Err(ReduceError::TooFewNodes(6));
    }
    let h = profile.step();
    let ddphi = second_derivative_row(&profile.phi, h);
    let ddpsi = second_derivative_row(&profile.psi, h);
    let op = ansatz.operator();

    let mut rows = Vec::new();
    let mut points = Vec::new();
    for it in 0..nt.max(2) {
        let t = t_range.0 + (t_range.1 - t_range.0) * it as f64 / (nt.max(2) - 1) as f64;
        for (i, &x) in profile.xs.iter().enumerate() {
            if x < x_range.0 - 1e-12 || x > x_range.1 + 1e-12 {
                continue;
            }
            let (u, v) = ansatz.lift(profile.phi[i], profile.psi[i], t, x);
            let (u_t, v_t) = ansatz.lift_dt(profile.phi[i], profile.psi[i], t, x);
            let (u_x, v_x) = ansatz.lift_dx(profile.dphi[i], profile.dpsi[i], t, x);
            let (u_xx, v_xx) = ansatz.lift_dxx(ddphi[i], ddpsi[i], t, x);
            let s1 = u_xx - sys.diff_u.eval1(u)? * u_t - sys.kin_u.eval(&[u, v])?;
            let s2 = v_xx - sys.diff_v.eval1(v)? * v_t - sys.kin_v.eval(&[u, v])?;
            let qu = op.characteristic(t, x, u_t, u_x, op.eta1(t, x, u)?)?;
            let qv = op.characteristic(t, x, v_t, v_x, op.eta2(t, x, u, v)?)?;
            rows.push(vec![s1, s2, qu, qv]);
            points.push([t, x, u, v]);
        }
    }
    if points.is_empty() {
        return Err(ReduceError::TooFewNodes(1));
    }
    Ok(ResidualReport::from_rows(
        &["pde-u", "pde-v", "invariance-u", "invariance-v"],
        rows,
        &points,
        1e-4,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn builtin_ansatz_values() {
        // case 1 with alpha = 2, beta = 3 at t = ln 2: factors 2^(1/2), 2^(1/3)
        let a = Ansatz::builtin(1, 2.0, 3.0).unwrap();
        let (u, v) = a.lift(1.0, 1.0, 2f64.ln(), 0.0);
        close(u, 2f64.powf(0.5), 1e-15);
        close(v, 2f64.powf(1.0 / 3.0), 1e-15);
    }

    #[test]
    fn case_3_is_additive() {
        let a = Ansatz::builtin(3, 0.7, 0.0).unwrap();
        let (u, v) = a.lift(1.5, -0.3, 2.0, 0.0);
        close(u, 1.5 + 2.0, 1e-15);
        close(v, -0.3 + 0.7 * 2.0, 1e-15);
    }

    #[test]
    fn all_cases_collapse_at_t0() {
        for (case, alpha, beta) in [(1, 1.3, -0.8), (2, 0.9, 0.0), (3, 1.1, 0.0), (4, 0.0, 1.7)]
        {
            let a = Ansatz::builtin(case, alpha, beta).unwrap();
            let (u, v) = a.lift(0.8, 1.2, 0.0, 0.4);
            close(u, 0.8, 1e-15);
            close(v, 1.2, 1e-15);
            let (phi, psi) = a.project(u, v, 0.0, 0.4);
            close(phi, 0.8, 1e-15);
            close(psi, 1.2, 1e-15);
        }
    }

    #[test]
    fn unsupported_case_rejected() {
        assert!(matches!(
            Ansatz::builtin(7, 1.0, 1.0),
            Err(ReduceError::UnsupportedCase(7))
        ));
    }

    #[test]
    fn zero_rhs_gives_linear_profiles() {
        let a = Ansatz::builtin(1, 1.0, 1.0).unwrap();
        let rhs = ReducedRhs::new(
            &a,
            FunctionDescriptor::constant(0.0, &["w"]),
            FunctionDescriptor::constant(0.0, &["w"]),
        )
        .unwrap();
        let prof = integrate_reduced(&rhs, [1.0, 2.0, 0.5, 0.0], (0.0, 1.0), 1e-2).unwrap();
        for (i, &x) in prof.xs.iter().enumerate() {
            close(prof.phi[i], 1.0 + 2.0 * x, 1e-12);
            close(prof.psi[i], 0.5, 1e-12);
        }
    }

    #[test]
    fn rk4_order_by_step_halving() {
        // smooth nonlinear rhs; compare against a very fine reference
        let rhs = FnRhs(|_x: f64, phi: f64, psi: f64| {
            Ok((-(phi * phi * phi) + psi, -psi + 0.2 * phi))
        });
        let ic = [1.0, 0.0, 0.5, -0.2];
        let reference = integrate_reduced(&rhs, ic, (0.0, 1.0), 1e-5).unwrap();
        let coarse = integrate_reduced(&rhs, ic, (0.0, 1.0), 0.02).unwrap();
        let fine = integrate_reduced(&rhs, ic, (0.0, 1.0), 0.01).unwrap();
        let err = |p: &ReducedProfile| {
            (p.phi.last().unwrap() - reference.phi.last().unwrap()).abs()
        };
        let ratio = err(&coarse) / err(&fine);
        assert!(
            (8.0..40.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio}"
        );
    }

    #[test]
    fn blow_up_is_reported() {
        let rhs = FnRhs(|_x: f64, phi: f64, _psi: f64| Ok((phi * phi * phi, 0.0)));
        let err = integrate_reduced(&rhs, [5.0, 15.0, 0.0, 0.0], (0.0, 10.0), 1e-3);
        assert!(matches!(err, Err(ReduceError::BlowUp { .. })));
    }

    #[test]
    fn stencil_row_is_fourth_order() {
        let f = |x: f64| (1.3 * x).sin() + 0.3 * x * x;
        let exact = |x: f64| -(1.3f64 * 1.3) * (1.3 * x).sin() + 0.6;
        let max_err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let values: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            let row = second_derivative_row(&values, h);
            row.iter()
                .enumerate()
                .map(|(i, r)| (r - exact(i as f64 * h)).abs())
                .fold(0.0, f64::max)
        };
        let coarse = max_err(101);
        let fine = max_err(201);
        assert!(coarse < 1e-6, "coarse err {coarse}");
        // 4th order: halving h cuts the error ~16x (allow slack for roundoff)
        assert!(fine < coarse / 8.0, "coarse {coarse}, fine {fine}");
    }

    /// Lifts with one parameter set but exposes another ansatz's operator:
    /// the shape of a transcription mistake the invariance check must catch.
    struct MismatchedLift {
        lift: Ansatz,
        operator_source: Ansatz,
    }

    impl AnsatzMap for MismatchedLift {
        fn lift(&self, phi: f64, psi: f64, t: f64, x: f64) -> (f64, f64) {
            self.lift.lift(phi, psi, t, x)
        }
        fn lift_dt(&self, phi: f64, psi: f64, t: f64, x: f64) -> (f64, f64) {
            self.lift.lift_dt(phi, psi, t, x)
        }
        fn lift_dx(&self, dphi: f64, dpsi: f64, t: f64, x: f64) -> (f64, f64) {
            self.lift.lift_dx(dphi, dpsi, t, x)
        }
        fn lift_dxx(&self, ddphi: f64, ddpsi: f64, t: f64, x: f64) -> (f64, f64) {
            self.lift.lift_dxx(ddphi, ddpsi, t, x)
        }
        fn project(&self, u: f64, v: f64, t: f64, x: f64) -> (f64, f64) {
            self.lift.project(u, v, t, x)
        }
        fn operator(&self) -> &SymmetryOperator {
            self.operator_source.operator()
        }
    }

    #[test]
    fn wrong_alpha_breaks_invariance() {
        // profiles for the alpha = 1 system, lifted with alpha = 1.3 and
        // checked against the true alpha = 1 operator
        let good = Ansatz::builtin(1, 1.0, 1.0).unwrap();
        let bad = MismatchedLift {
            lift: Ansatz::builtin(1, 1.3, 1.0).unwrap(),
            operator_source: good.clone(),
        };
        let rhs = ReducedRhs::new(
            &good,
            parse_expr("0.2+0.1*w", &["w"]).unwrap(),
            parse_expr("0.3-0.1*w", &["w"]).unwrap(),
        )
        .unwrap();
        let prof = integrate_reduced(&rhs, [1.0, 0.1, 1.2, -0.1], (0.0, 1.0), 1e-3).unwrap();
        let sys = RDSystem::transformed(
            parse_expr("exp(u)", &["u"]).unwrap(),
            FunctionDescriptor::power(1.0, "v"),
            parse_expr("u*(0.2+0.1*v/u) - u*exp(u)", &["u", "v"]).unwrap(),
            parse_expr("v*(0.3-0.1*v/u) - v^2", &["u", "v"]).unwrap(),
        )
        .unwrap();
        let good_report =
            lift_and_check(&good, &prof, &sys, (0.0, 1.0), 10, (0.0, 1.0)).unwrap();
        let bad_report = lift_and_check(&bad, &prof, &sys, (0.0, 1.0), 10, (0.0, 1.0)).unwrap();
        let qmax = |r: &ResidualReport| r.equation("invariance-u").unwrap().max_abs;
        assert!(qmax(&good_report) < 1e-10);
        assert!(qmax(&bad_report) > 0.01);
    }
}
