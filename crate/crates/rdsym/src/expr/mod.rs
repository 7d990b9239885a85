//! Evaluatable scalar functions of one or two variables.
//!
//! A [`FunctionDescriptor`] is the currency every other module trades in: the
//! diffusivities and kinetics of a system, user-supplied `f`/`g`, operator
//! coefficients, and the ODE-defined profile of the catalog's later entries
//! are all descriptors. A descriptor is immutable after construction and its
//! evaluation is reentrant.
//!
//! Derivatives (orders 1 and 2) are exact for the closed-form tags, come from
//! stored grid rows for grid-interpolated functions, use central finite
//! differences for parsed expressions, and are assembled by the chain rule
//! for composed fields.

mod field;
mod grid;
mod parse;

pub use field::Field;
pub use grid::GridInterp;
pub use parse::{Expr, ParseError};

pub(crate) use parse::parse_source;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised while evaluating a descriptor or one of its derivatives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("arity mismatch: expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("domain error: {op}({value}) is undefined")]
    Domain { op: &'static str, value: f64 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("argument {value} outside grid range [{lo}, {hi}]")]
    OutsideGrid { value: f64, lo: f64, hi: f64 },
    #[error("derivative order {0} unsupported (only 1 and 2)")]
    Order(u8),
    #[error("mixed partial through a multi-argument composition is unsupported")]
    MixedPartial,
}

/// How a descriptor evaluates. The tag kinds carry analytic derivatives; the
/// other kinds fall back to the scheme documented on [`FunctionDescriptor::deriv`].
#[derive(Debug, Clone)]
pub enum Kind {
    /// `s ↦ s^exponent`
    Power { exponent: f64 },
    /// `s ↦ exp(rate * s)`
    Exponential { rate: f64 },
    /// `s ↦ intercept + slope * s`
    Affine { intercept: f64, slope: f64 },
    /// `s ↦ value`
    Constant { value: f64 },
    /// Parsed expression over the declared variables.
    Parsed(Arc<Expr>),
    /// Values (and derivative rows) tabulated on a uniform grid.
    Grid(Arc<GridInterp>),
    /// Algebraic combination of other descriptors; see [`Field`].
    Composed(Arc<Field>),
}

/// An evaluatable scalar function of named variables.
#[derive(Clone)]
pub struct FunctionDescriptor {
    kind: Kind,
    vars: Arc<[String]>,
}

impl fmt::Debug for FunctionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionDescriptor({:?} of {:?})", self.kind, self.vars)
    }
}

fn varbox(vars: &[&str]) -> Arc<[String]> {
    vars.iter().map(|s| s.to_string()).collect()
}

impl FunctionDescriptor {
    pub fn power(exponent: f64, var: &str) -> Self {
        Self { kind: Kind::Power { exponent }, vars: varbox(&[var]) }
    }

    pub fn exponential(rate: f64, var: &str) -> Self {
        Self { kind: Kind::Exponential { rate }, vars: varbox(&[var]) }
    }

    pub fn affine(intercept: f64, slope: f64, var: &str) -> Self {
        Self { kind: Kind::Affine { intercept, slope }, vars: varbox(&[var]) }
    }

    pub fn constant(value: f64, vars: &[&str]) -> Self {
        Self { kind: Kind::Constant { value }, vars: varbox(vars) }
    }

    pub fn from_grid(grid: GridInterp, var: &str) -> Self {
        Self { kind: Kind::Grid(Arc::new(grid)), vars: varbox(&[var]) }
    }

    pub fn from_field(field: Field, vars: &[&str]) -> Self {
        Self { kind: Kind::Composed(Arc::new(field)), vars: varbox(vars) }
    }

    pub(crate) fn from_expr(expr: Expr, vars: Arc<[String]>) -> Self {
        Self { kind: Kind::Parsed(Arc::new(expr)), vars }
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    fn check_arity(&self, got: usize) -> Result<(), EvalError> {
        if got != self.vars.len() {
            return Err(EvalError::Arity { expected: self.vars.len(), got });
        }
        Ok(())
    }

    /// Evaluates the function at `args` (positional, matching [`Self::vars`]).
    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        self.check_arity(args.len())?;
        let value = match &self.kind {
            Kind::Power { exponent } => fractional_pow(args[0], *exponent)?,
            Kind::Exponential { rate } => (rate * args[0]).exp(),
            Kind::Affine { intercept, slope } => intercept + slope * args[0],
            Kind::Constant { value } => *value,
            Kind::Parsed(expr) => expr.eval(args)?,
            Kind::Grid(grid) => grid.eval(args[0], 0)?,
            Kind::Composed(field) => field.eval(args)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Shorthand for unary descriptors.
    pub fn eval1(&self, s: f64) -> Result<f64, EvalError> {
        self.eval(&[s])
    }

    /// Partial derivative of order 1 or 2 with respect to `vars[wrt]`.
    ///
    /// Closed-form tags differentiate analytically. Parsed expressions use
    /// 4th-order central differences with step `max(eps^(1/3)·|a|, eps^(1/3))`
    /// for order 1 and the `eps^(1/4)`-scaled analogue for order 2. Grid
    /// descriptors interpolate their stored derivative rows. Composed fields
    /// apply the chain rule, delegating to their components.
    pub fn deriv(&self, args: &[f64], wrt: usize, order: u8) -> Result<f64, EvalError> {
        self.check_arity(args.len())?;
        if order == 0 || order > 2 {
            return Err(EvalError::Order(order));
        }
        let value = match &self.kind {
            Kind::Power { exponent } => {
                let e = *exponent;
                if order == 1 {
                    e * fractional_pow(args[0], e - 1.0)?
                } else {
                    e * (e - 1.0) * fractional_pow(args[0], e - 2.0)?
                }
            }
            Kind::Exponential { rate } => rate.powi(order as i32) * (rate * args[0]).exp(),
            Kind::Affine { slope, .. } => {
                if order == 1 {
                    *slope
                } else {
                    0.0
                }
            }
            Kind::Constant { .. } => 0.0,
            Kind::Parsed(expr) => {
                let f = |s: f64| {
                    let mut shifted = args.to_vec();
                    shifted[wrt] = s;
                    expr.eval(&shifted)
                };
                if order == 1 {
                    central_diff1(&f, args[wrt])?
                } else {
                    central_diff2(&f, args[wrt])?
                }
            }
            Kind::Grid(grid) => grid.eval(args[0], order as usize)?,
            Kind::Composed(field) => {
                if order == 1 {
                    field.deriv1(args, wrt)?
                } else {
                    field.deriv2(args, wrt)?
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Derivative of a unary descriptor.
    pub fn deriv1(&self, s: f64, order: u8) -> Result<f64, EvalError> {
        self.deriv(&[s], 0, order)
    }

    /// Grammar text that reparses to an equivalent descriptor, where one
    /// exists (closed-form tags and parsed expressions; grid and composed
    /// descriptors have no source form).
    pub fn source(&self) -> Option<String> {
        match &self.kind {
            Kind::Power { exponent } => Some(format!("{}^({})", self.vars[0], exponent)),
            Kind::Exponential { rate } => {
                Some(format!("exp(({})*{})", rate, self.vars[0]))
            }
            Kind::Affine { intercept, slope } => {
                Some(format!("({})+({})*{}", intercept, slope, self.vars[0]))
            }
            Kind::Constant { value } => Some(format!("({value})")),
            Kind::Parsed(expr) => {
                Some(parse::ExprPrinter { expr, vars: &self.vars }.to_string())
            }
            Kind::Grid(_) | Kind::Composed(_) => None,
        }
    }

    /// True when the value cannot vary with any argument (constant tag or
    /// affine with zero slope).
    pub fn is_constant(&self) -> bool {
        match &self.kind {
            Kind::Constant { .. } => true,
            Kind::Affine { slope, .. } => *slope == 0.0,
            Kind::Power { exponent } => *exponent == 0.0,
            Kind::Exponential { rate } => *rate == 0.0,
            _ => false,
        }
    }
}

/// Parses `src` over the named variables. Grammar: numeric literals, the
/// variables, `+ - * / ^`, parentheses, `sin cos exp ln sqrt abs`, and the
/// constants `pi`, `e`. `^` is right-associative and binds tighter than unary
/// minus.
pub fn parse_expr(src: &str, vars: &[&str]) -> Result<FunctionDescriptor, ParseError> {
    let names = varbox(vars);
    let expr = parse_source(src, &names)?;
    Ok(FunctionDescriptor::from_expr(expr, names))
}

/// `base^expo` restricted to real results: negative bases are accepted only
/// for integral exponents.
pub fn fractional_pow(base: f64, expo: f64) -> Result<f64, EvalError> {
    if base > 0.0 {
        Ok(base.powf(expo))
    } else if base == 0.0 {
        if expo > 0.0 {
            Ok(0.0)
        } else if expo == 0.0 {
            Ok(1.0)
        } else {
            Err(EvalError::Domain { op: "pow", value: base })
        }
    } else if expo.fract() == 0.0 && expo.abs() < 9.0e15 {
        let mag = (-base).powf(expo);
        Ok(if (expo as i64) % 2 == 0 { mag } else { -mag })
    } else {
        Err(EvalError::Domain { op: "pow", value: base })
    }
}

/// 4th-order central first derivative with the cube-root-of-eps step rule.
pub fn central_diff1<F>(f: &F, a: f64) -> Result<f64, EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let eps_cbrt = f64::EPSILON.cbrt();
    let h = (eps_cbrt * a.abs()).max(eps_cbrt);
    Ok((f(a - 2.0 * h)? - 8.0 * f(a - h)? + 8.0 * f(a + h)? - f(a + 2.0 * h)?) / (12.0 * h))
}

/// 4th-order central second derivative with the fourth-root-of-eps step rule.
pub fn central_diff2<F>(f: &F, a: f64) -> Result<f64, EvalError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let eps_qrt = f64::EPSILON.powf(0.25);
    let h = (eps_qrt * a.abs()).max(eps_qrt);
    Ok(
        (-f(a + 2.0 * h)? + 16.0 * f(a + h)? - 30.0 * f(a)? + 16.0 * f(a - h)?
            - f(a - 2.0 * h)?)
            / (12.0 * h * h),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got}, want {want} (tol {tol})"
        );
    }

    #[test]
    fn parse_square() {
        let f = parse_expr("u^2", &["u"]).unwrap();
        assert_close(f.eval1(2.0).unwrap(), 4.0, 0.0);
    }

    #[test]
    fn parse_exp_identity() {
        let f = parse_expr("exp(v)", &["v"]).unwrap();
        assert_close(f.eval1(0.0).unwrap(), 1.0, 0.0);
    }

    #[test]
    fn parse_profile_head() {
        // 0.2 cos(sqrt(6) x) + 0.25 at x = 0 is forced to 0.45.
        let f = parse_expr("0.2*cos(sqrt(6)*x)+0.25", &["x"]).unwrap();
        assert_close(f.eval1(0.0).unwrap(), 0.45, 1e-15);
    }

    #[test]
    fn tag_derivative_exact() {
        let f = FunctionDescriptor::power(2.0, "u");
        assert_close(f.deriv1(3.0, 1).unwrap(), 6.0, 0.0);
    }

    #[test]
    fn parsed_derivative_fd() {
        let f = parse_expr("u^2", &["u"]).unwrap();
        assert_close(f.deriv1(3.0, 1).unwrap(), 6.0, 1e-8);
    }

    #[test]
    fn second_derivative_of_cosine() {
        // Independent oracle: d^2/dx^2 cos(h x) = -h^2 cos(h x), so -6 at 0.
        let h2 = 6.0_f64;
        let oracle = -h2 * (h2.sqrt() * 0.0).cos();
        let f = parse_expr("cos(sqrt(6)*x)", &["x"]).unwrap();
        assert_close(f.deriv1(0.0, 2).unwrap(), oracle, 1e-7);
    }

    #[test]
    fn constant_derivative_zero() {
        let f = FunctionDescriptor::constant(3.5, &["v"]);
        assert_close(f.deriv1(1.7, 1).unwrap(), 0.0, 0.0);
        assert_close(f.deriv1(-0.3, 2).unwrap(), 0.0, 0.0);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let f = parse_expr("u+v", &["u", "v"]).unwrap();
        assert!(matches!(
            f.eval(&[1.0]),
            Err(EvalError::Arity { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn domain_error_propagates() {
        let f = parse_expr("ln(u)", &["u"]).unwrap();
        assert!(f.eval1(-1.0).is_err());
    }

    #[test]
    fn fd_matches_analytic_for_tags() {
        // Spot version of the property check in tests/: every closed-form tag
        // agrees with the generic FD path to 1e-6 relative.
        let tags = [
            FunctionDescriptor::power(1.7, "s"),
            FunctionDescriptor::exponential(0.8, "s"),
            FunctionDescriptor::affine(0.4, -1.3, "s"),
        ];
        for f in &tags {
            for i in 0..100 {
                let s = 0.25 + 1.5 * (i as f64) / 99.0;
                for order in [1u8, 2u8] {
                    let analytic = f.deriv1(s, order).unwrap();
                    let g = |a: f64| f.eval1(a);
                    let fd = if order == 1 {
                        central_diff1(&g, s).unwrap()
                    } else {
                        central_diff2(&g, s).unwrap()
                    };
                    let scale = analytic.abs().max(1.0);
                    assert_close(fd, analytic, 1e-6 * scale);
                }
            }
        }
    }
}
