//! Numeric evaluation of the determining-equation systems.
//!
//! A (system, operator) pair is invariant exactly when the corresponding
//! equation system vanishes identically in (t, x, u, v); here each equation
//! is evaluated at a batch of sample points and the worst residual is
//! reported per equation. Three systems are implemented: the conditional
//! one for operators with a time component ([`residuals_first_type`]), the
//! purely spatial one ([`residuals_xi0_zero`]), and the classical Lie system
//! ([`residuals_lie`]). [`lie_equivalence_test`] checks the two restrictions
//! that collapse the conditional system onto the Lie one; a purely
//! conditional operator must fail it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::SymmetryOperator;
use crate::expr::{central_diff1, central_diff2, EvalError};
use crate::kirchhoff::{RDSystem, SystemForm};

/// Default certification tolerance for the determining-equation residuals.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Error)]
pub enum DetsysError {
    #[error("xi0 vanishes at sampled t = {t}; the conditional system divides by xi0")]
    Xi0Vanishes { t: f64 },
    #[error("xi1 vanishes at sampled x = {x}; the spatial system divides by xi1")]
    Xi1Vanishes { x: f64 },
    #[error("xi0 must be identically zero for the spatial system (xi0({t}) = {value})")]
    Xi0NotZero { t: f64, value: f64 },
    #[error("expected a transformed-form system")]
    FormMismatch,
    #[error("empty sample batch")]
    NoSamples,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Worst-case and RMS residual of one equation over the sample batch.
#[derive(Debug, Clone, Serialize)]
pub struct EquationStat {
    pub label: &'static str,
    pub max_abs: f64,
    pub l2: f64,
    pub worst_point: [f64; 4],
}

/// Residual report for one equation system over one sample batch.
/// `pass` holds exactly when every `max_abs` is within `tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub equations: Vec<EquationStat>,
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub(crate) fn from_rows(
        labels: &[&'static str],
        rows: Vec<Vec<f64>>,
        points: &[[f64; 4]],
        tolerance: f64,
    ) -> Self {
        let samples = points.len();
        let equations: Vec<EquationStat> = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let mut max_abs = 0.0;
                let mut worst = points[0];
                let mut sq = 0.0;
                for (j, row) in rows.iter().enumerate() {
                    let r = row[i].abs();
                    sq += r * r;
                    if r > max_abs {
                        max_abs = r;
                        worst = points[j];
                    }
                }
                EquationStat {
                    label,
                    max_abs,
                    l2: (sq / samples as f64).sqrt(),
                    worst_point: worst,
                }
            })
            .collect();
        let pass = equations.iter().all(|e| e.max_abs <= tolerance);
        Self { equations, samples, tolerance, pass }
    }

    pub fn max_abs(&self) -> f64 {
        self.equations.iter().map(|e| e.max_abs).fold(0.0, f64::max)
    }

    pub fn equation(&self, label: &str) -> Option<&EquationStat> {
        self.equations.iter().find(|e| e.label == label)
    }

    /// Plain-text table, one row per equation.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<26} {:>12} {:>12}   worst point (t, x, u, v)\n",
            "equation", "max|res|", "rms"
        ));
        for e in &self.equations {
            out.push_str(&format!(
                "{:<26} {:>12.3e} {:>12.3e}   ({:.3}, {:.3}, {:.3}, {:.3})\n",
                e.label, e.max_abs, e.l2, e.worst_point[0], e.worst_point[1],
                e.worst_point[2], e.worst_point[3]
            ));
        }
        out.push_str(&format!(
            "samples: {}   tolerance: {:.1e}   pass: {}\n",
            self.samples, self.tolerance, self.pass
        ));
        out
    }
}

/// Sampling box for (t, x, u, v), keeping every coordinate at least
/// `exclusion` away from zero (several entries contain 1/t, 1/u or ln v).
#[derive(Debug, Clone)]
pub struct SampleDomain {
    pub ranges: [[f64; 2]; 4],
    pub exclusion: f64,
}

impl Default for SampleDomain {
    fn default() -> Self {
        Self { ranges: [[0.1, 2.0]; 4], exclusion: 0.1 }
    }
}

impl SampleDomain {
    pub fn sample(&self, n: usize, seed: u64) -> Vec<[f64; 4]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut p = [0.0; 4];
            let mut ok = true;
            for (i, range) in self.ranges.iter().enumerate() {
                let v = rng.gen_range(range[0]..=range[1]);
                if v.abs() < self.exclusion {
                    ok = false;
                    break;
                }
                p[i] = v;
            }
            if ok {
                out.push(p);
            }
        }
        out
    }
}

/// Operator coefficient data at one (t, x) point.
struct OpCtx {
    xi0: f64,
    xi0_t: f64,
    xi1: f64,
    xi1_x: f64,
    xi1_xx: f64,
    r1: f64,
    r1_t: f64,
    r1_x: f64,
    r1_xx: f64,
    p1: f64,
    p1_t: f64,
    p1_xx: f64,
    q: f64,
    q_t: f64,
    q_x: f64,
    q_xx: f64,
    r2: f64,
    r2_t: f64,
    r2_x: f64,
    r2_xx: f64,
    p2: f64,
    p2_t: f64,
    p2_xx: f64,
}

impl OpCtx {
    fn build(op: &SymmetryOperator, t: f64, x: f64) -> Result<Self, DetsysError> {
        let tx = [t, x];
        Ok(Self {
            xi0: op.xi0.eval1(t)?,
            xi0_t: op.xi0.deriv1(t, 1)?,
            xi1: op.xi1.eval1(x)?,
            xi1_x: op.xi1.deriv1(x, 1)?,
            xi1_xx: op.xi1.deriv1(x, 2)?,
            r1: op.r1.eval(&tx)?,
            r1_t: op.r1.deriv(&tx, 0, 1)?,
            r1_x: op.r1.deriv(&tx, 1, 1)?,
            r1_xx: op.r1.deriv(&tx, 1, 2)?,
            p1: op.p1.eval(&tx)?,
            p1_t: op.p1.deriv(&tx, 0, 1)?,
            p1_xx: op.p1.deriv(&tx, 1, 2)?,
            q: op.q.eval(&tx)?,
            q_t: op.q.deriv(&tx, 0, 1)?,
            q_x: op.q.deriv(&tx, 1, 1)?,
            q_xx: op.q.deriv(&tx, 1, 2)?,
            r2: op.r2.eval(&tx)?,
            r2_t: op.r2.deriv(&tx, 0, 1)?,
            r2_x: op.r2.deriv(&tx, 1, 1)?,
            r2_xx: op.r2.deriv(&tx, 1, 2)?,
            p2: op.p2.eval(&tx)?,
            p2_t: op.p2.deriv(&tx, 0, 1)?,
            p2_xx: op.p2.deriv(&tx, 1, 2)?,
        })
    }

    fn eta1(&self, u: f64) -> f64 {
        self.r1 * u + self.p1
    }
    fn eta1_t(&self, u: f64) -> f64 {
        self.r1_t * u + self.p1_t
    }
    fn eta1_xx(&self, u: f64) -> f64 {
        self.r1_xx * u + self.p1_xx
    }
    fn eta2(&self, u: f64, v: f64) -> f64 {
        self.q * u + self.r2 * v + self.p2
    }
    fn eta2_t(&self, u: f64, v: f64) -> f64 {
        self.q_t * u + self.r2_t * v + self.p2_t
    }
    fn eta2_xx(&self, u: f64, v: f64) -> f64 {
        self.q_xx * u + self.r2_xx * v + self.p2_xx
    }
}

/// System coefficient data at one (u, v) point.
struct SysCtx {
    d1: f64,
    d1_u: f64,
    d2: f64,
    d2_v: f64,
    c1: f64,
    c1_u: f64,
    c1_v: f64,
    c2: f64,
    c2_u: f64,
    c2_v: f64,
}

impl SysCtx {
    fn build(sys: &RDSystem, u: f64, v: f64) -> Result<Self, DetsysError> {
        let uv = [u, v];
        Ok(Self {
            d1: sys.diff_u.eval1(u)?,
            d1_u: sys.diff_u.deriv1(u, 1)?,
            d2: sys.diff_v.eval1(v)?,
            d2_v: sys.diff_v.deriv1(v, 1)?,
            c1: sys.kin_u.eval(&uv)?,
            c1_u: sys.kin_u.deriv(&uv, 0, 1)?,
            c1_v: sys.kin_u.deriv(&uv, 1, 1)?,
            c2: sys.kin_v.eval(&uv)?,
            c2_u: sys.kin_v.deriv(&uv, 0, 1)?,
            c2_v: sys.kin_v.deriv(&uv, 1, 1)?,
        })
    }
}

fn require_transformed(sys: &RDSystem) -> Result<(), DetsysError> {
    if sys.form != SystemForm::Transformed {
        return Err(DetsysError::FormMismatch);
    }
    Ok(())
}

pub const FIRST_TYPE_LABELS: [&str; 8] = [
    "xi0-depends-only-on-t",
    "eta-linear-structure",
    "cross-coupling",
    "xi1-diffusion-u",
    "eta2-diffusion-v",
    "eta2-x-coupling",
    "kinetics-u",
    "kinetics-v",
];

/// The eight-equation conditional system for operators with `xi0 != 0`.
///
/// The first two equations are satisfied identically by the structured
/// coefficient form of [`SymmetryOperator`] (xi0 a function of t alone, the
/// etas linear in u and v); they are reported as exact zeros. The remaining
/// six carry the content.
pub fn residuals_first_type(
    sys: &RDSystem,
    op: &SymmetryOperator,
    samples: &[[f64; 4]],
    tolerance: f64,
) -> Result<ResidualReport, DetsysError> {
    require_transformed(sys)?;
    if samples.is_empty() {
        return Err(DetsysError::NoSamples);
    }
    let mut rows = Vec::with_capacity(samples.len());
    for &[t, x, u, v] in samples {
        let o = OpCtx::build(op, t, x)?;
        if o.xi0.abs() <= 1e-9 {
            return Err(DetsysError::Xi0Vanishes { t });
        }
        let s = SysCtx::build(sys, u, v)?;
        let eta1 = o.eta1(u);
        let eta2 = o.eta2(u, v);
        let ratio = eta1 / o.xi0;

        let e3 = o.xi1 * o.q * (s.d2 - s.d1) + 2.0 * o.xi0 * o.q_x;
        let e4 = (o.xi0_t * o.xi1 - 2.0 * o.xi1 * o.xi1_x) * s.d1
            - o.xi1 * eta1 * s.d1_u
            - 2.0 * o.xi0 * o.r1_x
            + o.xi0 * o.xi1_xx;
        let e5 = (2.0 * o.xi1_x - o.xi0_t) * s.d2 + eta2 * s.d2_v;
        let e6 = 2.0 * o.r2_x - o.xi1_xx;
        let e7 = ratio * eta1 * s.d1_u
            + (o.eta1_t(u) + (2.0 * o.xi1_x - o.xi0_t) * ratio) * s.d1
            - o.eta1_xx(u)
            + eta1 * s.c1_u
            + eta2 * s.c1_v
            + (2.0 * o.xi1_x - o.r1) * s.c1;
        let e8 = (o.eta2_t(u, v) + ratio * o.q) * s.d2 - ratio * o.q * s.d1
            - o.eta2_xx(u, v)
            + eta1 * s.c2_u
            + eta2 * s.c2_v
            - o.q * s.c1
            + (2.0 * o.xi1_x - o.r2) * s.c2;
        rows.push(vec![0.0, 0.0, e3, e4, e5, e6, e7, e8]);
    }
    Ok(ResidualReport::from_rows(&FIRST_TYPE_LABELS, rows, samples, tolerance))
}

pub const XI0_ZERO_LABELS: [&str; 7] = [
    "xi1-depends-only-on-x",
    "eta-linear-structure",
    "xi1-diffusion-u",
    "xi1-diffusion-v",
    "eta2-x-coupling",
    "kinetics-u",
    "kinetics-v",
];

/// The seven-equation system for purely spatial operators (`xi0 ≡ 0`,
/// `xi1 != 0`). A degenerate all-zero operator is rejected through the
/// `xi1 != 0` precondition.
pub fn residuals_xi0_zero(
    sys: &RDSystem,
    op: &SymmetryOperator,
    samples: &[[f64; 4]],
    tolerance: f64,
) -> Result<ResidualReport, DetsysError> {
    require_transformed(sys)?;
    if samples.is_empty() {
        return Err(DetsysError::NoSamples);
    }
    let mut rows = Vec::with_capacity(samples.len());
    for &[t, x, u, v] in samples {
        let xi0 = op.xi0.eval1(t)?;
        if xi0 != 0.0 {
            return Err(DetsysError::Xi0NotZero { t, value: xi0 });
        }
        let o = OpCtx::build(op, t, x)?;
        if o.xi1.abs() <= 1e-9 {
            return Err(DetsysError::Xi1Vanishes { x });
        }
        let s = SysCtx::build(sys, u, v)?;
        let eta1 = o.eta1(u);
        let eta2 = o.eta2(u, v);
        // the mixed q u term is structurally excluded from eta1 but eta2's
        // u-coefficient is an equation here, not a structural zero
        let z2 = o.q.abs() + o.q_t.abs() + o.q_x.abs();
        let z3 = 2.0 * o.xi1_x * s.d1 + eta1 * s.d1_u;
        let z4 = 2.0 * o.xi1_x * s.d2 + eta2 * s.d2_v;
        let z5 = 2.0 * o.r2_x - o.xi1_xx;
        let z6 = o.eta1_t(u) * s.d1
            - (eta1 / o.xi1) * (2.0 * o.r1_x - o.xi1_xx)
            - o.eta1_xx(u)
            + eta1 * s.c1_u
            + eta2 * s.c1_v
            + (2.0 * o.xi1_x - o.r1) * s.c1;
        let z7 = o.eta2_t(u, v) * s.d2 - o.eta2_xx(u, v)
            + eta1 * s.c2_u
            + eta2 * s.c2_v
            + (2.0 * o.xi1_x - o.r2) * s.c2;
        rows.push(vec![0.0, z2, z3, z4, z5, z6, z7]);
    }
    Ok(ResidualReport::from_rows(&XI0_ZERO_LABELS, rows, samples, tolerance))
}

pub const LIE_LABELS: [&str; 8] = [
    "xi-depend-structure",
    "eta-linear-structure",
    "diffusion-scaling-u",
    "diffusion-scaling-v",
    "eta1-x-coupling",
    "eta2-x-coupling",
    "kinetics-u",
    "kinetics-v",
];

/// The classical Lie determining system (eight equations).
pub fn residuals_lie(
    sys: &RDSystem,
    op: &SymmetryOperator,
    samples: &[[f64; 4]],
    tolerance: f64,
) -> Result<ResidualReport, DetsysError> {
    require_transformed(sys)?;
    if samples.is_empty() {
        return Err(DetsysError::NoSamples);
    }
    let mut rows = Vec::with_capacity(samples.len());
    for &[t, x, u, v] in samples {
        let o = OpCtx::build(op, t, x)?;
        let s = SysCtx::build(sys, u, v)?;
        let eta1 = o.eta1(u);
        let eta2 = o.eta2(u, v);
        let l2 = o.q.abs();
        let l3 = (2.0 * o.xi1_x - o.xi0_t) * s.d1 + eta1 * s.d1_u;
        let l4 = (2.0 * o.xi1_x - o.xi0_t) * s.d2 + eta2 * s.d2_v;
        let l5 = 2.0 * o.r1_x - o.xi1_xx;
        let l6 = 2.0 * o.r2_x - o.xi1_xx;
        let l7 = o.eta1_t(u) * s.d1 - o.eta1_xx(u)
            + eta1 * s.c1_u
            + eta2 * s.c1_v
            + (2.0 * o.xi1_x - o.r1) * s.c1;
        let l8 = o.eta2_t(u, v) * s.d2 - o.eta2_xx(u, v)
            + eta1 * s.c2_u
            + eta2 * s.c2_v
            + (2.0 * o.xi1_x - o.r2) * s.c2;
        rows.push(vec![0.0, l2, l3, l4, l5, l6, l7, l8]);
    }
    Ok(ResidualReport::from_rows(&LIE_LABELS, rows, samples, tolerance))
}

/// Witness of a failed Lie-equivalence restriction.
#[derive(Debug, Clone, Serialize)]
pub struct LieWitness {
    pub point: [f64; 4],
    /// `eta2_u` at the witness (must vanish for equivalence).
    pub mixing: f64,
    /// `(2 xi1_x - xi0_t) d1 + eta1 d1_u` at the witness.
    pub scaling_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LieEquivalence {
    pub equivalent: bool,
    pub witness: Option<LieWitness>,
}

/// True when the two restrictions collapsing the conditional system onto the
/// Lie system hold at every sample (within 1e-8): `eta2_u = 0` and
/// `(2 xi1_x - xi0_t) d1 + eta1 d1_u = 0`. A catalog operator is genuinely
/// conditional exactly when this returns false, and the returned witness
/// names a point where a restriction breaks.
pub fn lie_equivalence_test(
    sys: &RDSystem,
    op: &SymmetryOperator,
    samples: &[[f64; 4]],
) -> Result<LieEquivalence, DetsysError> {
    require_transformed(sys)?;
    const TOL: f64 = 1e-8;
    for &[t, x, u, v] in samples {
        let o = OpCtx::build(op, t, x)?;
        let s = SysCtx::build(sys, u, v)?;
        let mixing = o.q;
        let scaling = (2.0 * o.xi1_x - o.xi0_t) * s.d1 + o.eta1(u) * s.d1_u;
        if mixing.abs() > TOL || scaling.abs() > TOL {
            return Ok(LieEquivalence {
                equivalent: false,
                witness: Some(LieWitness {
                    point: [t, x, u, v],
                    mixing,
                    scaling_defect: scaling,
                }),
            });
        }
    }
    Ok(LieEquivalence { equivalent: true, witness: None })
}

/// Residuals of the transformed system on a closed-form pair (u, v)(t, x),
/// using 4th-order finite differences for the t- and x-derivatives. This is
/// the independent check behind the exact-solution families.
pub fn closed_form_residuals<U, V>(
    sys: &RDSystem,
    u_fn: U,
    v_fn: V,
    t_range: (f64, f64),
    x_range: (f64, f64),
    nt: usize,
    nx: usize,
    tolerance: f64,
) -> Result<ResidualReport, DetsysError>
where
    U: Fn(f64, f64) -> Result<f64, EvalError>,
    V: Fn(f64, f64) -> Result<f64, EvalError>,
{
    require_transformed(sys)?;
    if nt < 2 || nx < 2 {
        return Err(DetsysError::NoSamples);
    }
    let mut rows = Vec::with_capacity(nt * nx);
    let mut points = Vec::with_capacity(nt * nx);
    for i in 0..nt {
        let t = t_range.0 + (t_range.1 - t_range.0) * i as f64 / (nt - 1) as f64;
        for j in 0..nx {
            let x = x_range.0 + (x_range.1 - x_range.0) * j as f64 / (nx - 1) as f64;
            let u = u_fn(t, x)?;
            let v = v_fn(t, x)?;
            let u_t = central_diff1(&|s| u_fn(s, x), t)?;
            let v_t = central_diff1(&|s| v_fn(s, x), t)?;
            let u_xx = central_diff2(&|s| u_fn(t, s), x)?;
            let v_xx = central_diff2(&|s| v_fn(t, s), x)?;
            let s1 = u_xx
                - sys.diff_u.eval1(u)? * u_t
                - sys.kin_u.eval(&[u, v])?;
            let s2 = v_xx
                - sys.diff_v.eval1(v)? * v_t
                - sys.kin_v.eval(&[u, v])?;
            rows.push(vec![s1, s2]);
            points.push([t, x, u, v]);
        }
    }
    Ok(ResidualReport::from_rows(&["pde-u", "pde-v"], rows, &points, tolerance))
}
