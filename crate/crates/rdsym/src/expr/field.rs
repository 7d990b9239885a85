//! Algebraic combinations of descriptors over named coordinates.
//!
//! Catalog entries, transformed systems, and operator coefficients are all
//! built from this small AST. Unlike parsed user expressions, fields
//! differentiate by the chain rule, delegating derivatives of embedded
//! descriptors to the descriptors themselves. That keeps residual checks at
//! analytic accuracy even when a coefficient contains an ODE-defined or
//! user-parsed component.

use std::ops::{Add, Div, Mul, Sub};

use super::{fractional_pow, EvalError, FunctionDescriptor};

#[derive(Debug, Clone)]
pub enum Field {
    Const(f64),
    /// Coordinate by position in the owning descriptor's variable list.
    Coord(usize),
    Add(Box<Field>, Box<Field>),
    Sub(Box<Field>, Box<Field>),
    Mul(Box<Field>, Box<Field>),
    Div(Box<Field>, Box<Field>),
    /// `base^c` for a fixed real exponent.
    PowConst(Box<Field>, f64),
    Exp(Box<Field>),
    Ln(Box<Field>),
    /// Application of a descriptor to computed arguments.
    Apply(FunctionDescriptor, Vec<Field>),
}

impl Field {
    pub fn konst(c: f64) -> Self {
        Field::Const(c)
    }

    pub fn coord(i: usize) -> Self {
        Field::Coord(i)
    }

    pub fn powc(self, c: f64) -> Self {
        Field::PowConst(Box::new(self), c)
    }

    pub fn exp(self) -> Self {
        Field::Exp(Box::new(self))
    }

    pub fn ln(self) -> Self {
        Field::Ln(Box::new(self))
    }

    pub fn apply(func: &FunctionDescriptor, args: Vec<Field>) -> Self {
        Field::Apply(func.clone(), args)
    }

    /// Shorthand for applying a unary descriptor.
    pub fn apply1(func: &FunctionDescriptor, arg: Field) -> Self {
        Field::Apply(func.clone(), vec![arg])
    }

    /// Structural test: can the value vary with coordinate `i`?
    pub fn depends_on(&self, i: usize) -> bool {
        match self {
            Field::Const(_) => false,
            Field::Coord(j) => *j == i,
            Field::Add(a, b) | Field::Sub(a, b) | Field::Mul(a, b) | Field::Div(a, b) => {
                a.depends_on(i) || b.depends_on(i)
            }
            Field::PowConst(a, _) | Field::Exp(a) | Field::Ln(a) => a.depends_on(i),
            Field::Apply(_, args) => args.iter().any(|a| a.depends_on(i)),
        }
    }

    /// Replaces every `Coord(i)` with `subs[i]`. Used by the equivalence
    /// transformations to reparametrize coefficients.
    pub fn substitute(&self, subs: &[Field]) -> Field {
        match self {
            Field::Const(c) => Field::Const(*c),
            Field::Coord(i) => subs[*i].clone(),
            Field::Add(a, b) => {
                Field::Add(Box::new(a.substitute(subs)), Box::new(b.substitute(subs)))
            }
            Field::Sub(a, b) => {
                Field::Sub(Box::new(a.substitute(subs)), Box::new(b.substitute(subs)))
            }
            Field::Mul(a, b) => {
                Field::Mul(Box::new(a.substitute(subs)), Box::new(b.substitute(subs)))
            }
            Field::Div(a, b) => {
                Field::Div(Box::new(a.substitute(subs)), Box::new(b.substitute(subs)))
            }
            Field::PowConst(a, c) => Field::PowConst(Box::new(a.substitute(subs)), *c),
            Field::Exp(a) => Field::Exp(Box::new(a.substitute(subs))),
            Field::Ln(a) => Field::Ln(Box::new(a.substitute(subs))),
            Field::Apply(f, args) => {
                Field::Apply(f.clone(), args.iter().map(|a| a.substitute(subs)).collect())
            }
        }
    }

    pub fn eval(&self, coords: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Field::Const(c) => *c,
            Field::Coord(i) => coords[*i],
            Field::Add(a, b) => a.eval(coords)? + b.eval(coords)?,
            Field::Sub(a, b) => a.eval(coords)? - b.eval(coords)?,
            Field::Mul(a, b) => a.eval(coords)? * b.eval(coords)?,
            Field::Div(a, b) => {
                let den = b.eval(coords)?;
                if den == 0.0 {
                    return Err(EvalError::Domain { op: "div", value: 0.0 });
                }
                a.eval(coords)? / den
            }
            Field::PowConst(a, c) => fractional_pow(a.eval(coords)?, *c)?,
            Field::Exp(a) => a.eval(coords)?.exp(),
            Field::Ln(a) => {
                let v = a.eval(coords)?;
                if v <= 0.0 {
                    return Err(EvalError::Domain { op: "ln", value: v });
                }
                v.ln()
            }
            Field::Apply(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(a.eval(coords)?);
                }
                f.eval(&vals)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// First partial derivative with respect to coordinate `wrt`.
    pub fn deriv1(&self, coords: &[f64], wrt: usize) -> Result<f64, EvalError> {
        let v = match self {
            Field::Const(_) => 0.0,
            Field::Coord(i) => {
                if *i == wrt {
                    1.0
                } else {
                    0.0
                }
            }
            Field::Add(a, b) => a.deriv1(coords, wrt)? + b.deriv1(coords, wrt)?,
            Field::Sub(a, b) => a.deriv1(coords, wrt)? - b.deriv1(coords, wrt)?,
            Field::Mul(a, b) => {
                a.deriv1(coords, wrt)? * b.eval(coords)?
                    + a.eval(coords)? * b.deriv1(coords, wrt)?
            }
            Field::Div(a, b) => {
                let g = b.eval(coords)?;
                if g == 0.0 {
                    return Err(EvalError::Domain { op: "div", value: 0.0 });
                }
                (a.deriv1(coords, wrt)? * g - a.eval(coords)? * b.deriv1(coords, wrt)?)
                    / (g * g)
            }
            Field::PowConst(a, c) => {
                if !a.depends_on(wrt) {
                    0.0
                } else {
                    c * fractional_pow(a.eval(coords)?, c - 1.0)? * a.deriv1(coords, wrt)?
                }
            }
            Field::Exp(a) => a.eval(coords)?.exp() * a.deriv1(coords, wrt)?,
            Field::Ln(a) => {
                let v = a.eval(coords)?;
                if v <= 0.0 {
                    return Err(EvalError::Domain { op: "ln", value: v });
                }
                a.deriv1(coords, wrt)? / v
            }
            Field::Apply(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(a.eval(coords)?);
                }
                let mut acc = 0.0;
                for (j, a) in args.iter().enumerate() {
                    if a.depends_on(wrt) {
                        acc += f.deriv(&vals, j, 1)? * a.deriv1(coords, wrt)?;
                    }
                }
                acc
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Second partial derivative with respect to coordinate `wrt` (no mixed
    /// partials). Compositions of multi-argument descriptors support this
    /// only while at most one argument varies with `wrt`.
    pub fn deriv2(&self, coords: &[f64], wrt: usize) -> Result<f64, EvalError> {
        let v = match self {
            Field::Const(_) | Field::Coord(_) => 0.0,
            Field::Add(a, b) => a.deriv2(coords, wrt)? + b.deriv2(coords, wrt)?,
            Field::Sub(a, b) => a.deriv2(coords, wrt)? - b.deriv2(coords, wrt)?,
            Field::Mul(a, b) => {
                a.deriv2(coords, wrt)? * b.eval(coords)?
                    + 2.0 * a.deriv1(coords, wrt)? * b.deriv1(coords, wrt)?
                    + a.eval(coords)? * b.deriv2(coords, wrt)?
            }
            Field::Div(a, b) => {
                let g = b.eval(coords)?;
                if g == 0.0 {
                    return Err(EvalError::Domain { op: "div", value: 0.0 });
                }
                let f0 = a.eval(coords)?;
                let f1 = a.deriv1(coords, wrt)?;
                let f2 = a.deriv2(coords, wrt)?;
                let g1 = b.deriv1(coords, wrt)?;
                let g2 = b.deriv2(coords, wrt)?;
                (f2 * g - f0 * g2) / (g * g) - 2.0 * g1 * (f1 * g - f0 * g1) / (g * g * g)
            }
            Field::PowConst(a, c) => {
                if !a.depends_on(wrt) {
                    0.0
                } else {
                    let v0 = a.eval(coords)?;
                    let v1 = a.deriv1(coords, wrt)?;
                    let v2 = a.deriv2(coords, wrt)?;
                    c * (c - 1.0) * fractional_pow(v0, c - 2.0)? * v1 * v1
                        + c * fractional_pow(v0, c - 1.0)? * v2
                }
            }
            Field::Exp(a) => {
                let v0 = a.eval(coords)?.exp();
                let v1 = a.deriv1(coords, wrt)?;
                v0 * (v1 * v1 + a.deriv2(coords, wrt)?)
            }
            Field::Ln(a) => {
                let v0 = a.eval(coords)?;
                if v0 <= 0.0 {
                    return Err(EvalError::Domain { op: "ln", value: v0 });
                }
                let v1 = a.deriv1(coords, wrt)?;
                a.deriv2(coords, wrt)? / v0 - (v1 / v0) * (v1 / v0)
            }
            Field::Apply(f, args) => {
                let varying: Vec<usize> = (0..args.len())
                    .filter(|&j| args[j].depends_on(wrt))
                    .collect();
                match varying.len() {
                    0 => 0.0,
                    1 => {
                        let j = varying[0];
                        let mut vals = Vec::with_capacity(args.len());
                        for a in args {
                            vals.push(a.eval(coords)?);
                        }
                        let a1 = args[j].deriv1(coords, wrt)?;
                        let a2 = args[j].deriv2(coords, wrt)?;
                        f.deriv(&vals, j, 2)? * a1 * a1 + f.deriv(&vals, j, 1)? * a2
                    }
                    _ => return Err(EvalError::MixedPartial),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

impl Add for Field {
    type Output = Field;
    fn add(self, rhs: Field) -> Field {
        Field::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Field {
    type Output = Field;
    fn sub(self, rhs: Field) -> Field {
        Field::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Mul for Field {
    type Output = Field;
    fn mul(self, rhs: Field) -> Field {
        Field::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Div for Field {
    type Output = Field;
    fn div(self, rhs: Field) -> Field {
        Field::Div(Box::new(self), Box::new(rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn chain_rule_through_descriptor() {
        // g(x) = f(x^2) with f = exp(0.5 s): g' = x exp(0.5 x^2), g'' by product rule
        let f = FunctionDescriptor::exponential(0.5, "s");
        let g = Field::apply1(&f, Field::coord(0).powc(2.0));
        let x = 1.3_f64;
        let want = (0.5 * x * x).exp();
        close(g.eval(&[x]).unwrap(), want, 1e-14);
        close(g.deriv1(&[x], 0).unwrap(), x * want, 1e-12);
        close(g.deriv2(&[x], 0).unwrap(), (1.0 + x * x) * want, 1e-12);
    }

    #[test]
    fn quotient_and_product_rules() {
        // h(t) = exp(2t) / (1 + t^2)
        let h = Field::coord(0).powc(1.0); // t
        let f = (Field::konst(2.0) * h.clone()).exp()
            / (Field::konst(1.0) + Field::coord(0).powc(2.0));
        let t = 0.7_f64;
        let num = (2.0 * t).exp();
        let den = 1.0 + t * t;
        close(f.eval(&[t]).unwrap(), num / den, 1e-14);
        let d1 = (2.0 * num * den - num * 2.0 * t) / (den * den);
        close(f.deriv1(&[t], 0).unwrap(), d1, 1e-12);
        // second derivative cross-checked against central differences
        let fd = |s: f64| f.eval(&[s]);
        let d2 = super::super::central_diff2(&fd, t).unwrap();
        close(f.deriv2(&[t], 0).unwrap(), d2, 1e-7);
    }

    #[test]
    fn mixed_partial_guard() {
        let f = FunctionDescriptor::constant(1.0, &["a", "b"]);
        let g = Field::apply(&f, vec![Field::coord(0), Field::coord(0).powc(2.0)]);
        assert!(matches!(g.deriv2(&[1.0], 0), Err(EvalError::MixedPartial)));
    }

    #[test]
    fn substitution_reparametrizes() {
        // w(u) = u^2, then u -> (s - 1) / 2
        let w = Field::coord(0).powc(2.0);
        let sub = w.substitute(&[(Field::coord(0) - Field::konst(1.0)) / Field::konst(2.0)]);
        close(sub.eval(&[5.0]).unwrap(), 4.0, 1e-15);
    }
}
