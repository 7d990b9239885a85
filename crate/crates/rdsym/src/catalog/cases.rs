//! The 21 case recipes: restriction predicates, coefficient fields, and
//! operator factories.
//!
//! Each builder takes an extra `delta` that perturbs the case's structural
//! kinetic coefficient (the one tying the kinetics to the diffusivity or the
//! operator). `delta = 0` reproduces the table entry; a nonzero `delta`
//! produces a deliberately broken system that the residual certification
//! must flag.

use super::{
    solve_p, zero2, CaseInfo, CatalogError, Instantiation, SymmetryOperator,
};
use crate::expr::{Field, FunctionDescriptor, Kind};
use crate::kirchhoff::RDSystem;

pub(crate) fn infos() -> Vec<CaseInfo> {
    vec![
        CaseInfo {
            case_id: 1,
            params: &["alpha", "beta"],
            functions: &["d1", "f", "g"],
            restrictions: "alpha*beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 2,
            params: &["alpha"],
            functions: &["d1", "f", "g"],
            restrictions: "alpha != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 3,
            params: &["alpha"],
            functions: &["d1", "f", "g"],
            restrictions: "alpha != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 4,
            params: &["beta"],
            functions: &["d1", "f", "g"],
            restrictions: "beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 5,
            params: &["alpha", "beta", "lambda"],
            functions: &["d1", "f", "g"],
            restrictions: "alpha*beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 6,
            params: &["alpha", "lambda"],
            functions: &["d1", "f", "g"],
            restrictions: "alpha != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 7,
            params: &["beta"],
            functions: &["d1", "f", "g"],
            restrictions: "beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 8,
            params: &[],
            functions: &["d1", "f", "g"],
            restrictions: "",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 9,
            params: &["alpha"],
            functions: &["d1", "d2", "f", "g"],
            restrictions: "alpha != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 10,
            params: &["alpha", "beta", "lambda"],
            functions: &["d2", "f", "g"],
            restrictions: "lambda*alpha*beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 11,
            params: &["beta"],
            functions: &["d2", "f", "g"],
            restrictions: "beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 12,
            params: &["alpha"],
            functions: &["d1", "d2", "f", "g"],
            restrictions: "alpha != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 13,
            params: &["alpha", "lambda"],
            functions: &["d2", "f", "g"],
            restrictions: "lambda*alpha != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 14,
            params: &[],
            functions: &["d2", "f", "g"],
            restrictions: "",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 15,
            params: &["alpha"],
            functions: &["d2", "f", "g"],
            restrictions: "p_init != (0, 0)",
            profile_ode: Some("p'' = p^2 + alpha*p"),
        },
        CaseInfo {
            case_id: 16,
            params: &["alpha1", "alpha2", "alpha3", "alpha4"],
            functions: &[],
            restrictions: "alpha1 != 0",
            profile_ode: Some("p'' = p^2 + alpha2*p + alpha1"),
        },
        CaseInfo {
            case_id: 17,
            params: &["alpha1", "alpha2", "alpha3", "alpha4", "beta"],
            functions: &[],
            restrictions: "alpha1*beta != 0",
            profile_ode: Some("p'' = p^2 + alpha2*p + alpha1"),
        },
        CaseInfo {
            case_id: 18,
            params: &["alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "beta"],
            functions: &[],
            restrictions: "alpha1*beta != 0",
            profile_ode: Some("p'' = p^2 + alpha3*p - alpha4"),
        },
        CaseInfo {
            case_id: 19,
            params: &["alpha1", "alpha2", "alpha3", "alpha4", "alpha5"],
            functions: &[],
            restrictions: "alpha1*alpha2 != 0",
            profile_ode: Some("p'' = p^2 + alpha3*p - alpha4"),
        },
        CaseInfo {
            case_id: 20,
            params: &["alpha1", "alpha2", "alpha3", "beta"],
            functions: &[],
            restrictions: "alpha1*alpha2*beta != 0",
            profile_ode: None,
        },
        CaseInfo {
            case_id: 21,
            params: &["alpha1", "alpha2", "alpha3"],
            functions: &[],
            restrictions: "alpha1*alpha2 != 0",
            profile_ode: None,
        },
    ]
}

// Field shorthands. Kinetics fields live on coordinates (u, v); operator
// coefficient fields live on (t, x). Both use index 0/1.
fn k(c: f64) -> Field {
    Field::konst(c)
}
fn uc() -> Field {
    Field::coord(0)
}
fn vc() -> Field {
    Field::coord(1)
}
fn tc() -> Field {
    Field::coord(0)
}
fn xc() -> Field {
    Field::coord(1)
}
fn ap(f: &FunctionDescriptor, arg: Field) -> Field {
    Field::apply1(f, arg)
}
fn kin(field: Field) -> FunctionDescriptor {
    FunctionDescriptor::from_field(field, &["u", "v"])
}
fn coeff(field: Field) -> FunctionDescriptor {
    FunctionDescriptor::from_field(field, &["t", "x"])
}
fn tfun(field: Field) -> FunctionDescriptor {
    FunctionDescriptor::from_field(field, &["t"])
}
fn exp_t(rate: f64) -> Field {
    (k(rate) * tc()).exp()
}
fn zero_x() -> FunctionDescriptor {
    FunctionDescriptor::constant(0.0, &["x"])
}

struct Ctx<'a> {
    inst: &'a Instantiation,
    delta: f64,
}

impl Ctx<'_> {
    fn case(&self) -> u8 {
        self.inst.case
    }

    fn param(&self, name: &str) -> Result<f64, CatalogError> {
        self.inst.params.get(name).copied().ok_or(CatalogError::MissingParam {
            case: self.case(),
            name: name.to_string(),
        })
    }

    fn func(&self, name: &str) -> Result<&FunctionDescriptor, CatalogError> {
        let f = self.inst.functions.get(name).ok_or(CatalogError::MissingFunction {
            case: self.case(),
            name: name.to_string(),
        })?;
        if f.arity() != 1 {
            return Err(CatalogError::ExcludedForm {
                case: self.case(),
                reason: format!("user function `{name}` must be univariate"),
            });
        }
        if (name == "d1" || name == "d2") && f.is_constant() {
            return Err(CatalogError::Restriction {
                case: self.case(),
                predicate: format!("{name} must be non-constant"),
            });
        }
        Ok(f)
    }

    fn require(&self, ok: bool, predicate: &str) -> Result<(), CatalogError> {
        if ok {
            Ok(())
        } else {
            Err(CatalogError::Restriction {
                case: self.case(),
                predicate: predicate.to_string(),
            })
        }
    }

    fn exclude_tag(&self, bad: bool, reason: &str) -> Result<(), CatalogError> {
        if bad {
            Err(CatalogError::ExcludedForm { case: self.case(), reason: reason.to_string() })
        } else {
            Ok(())
        }
    }

    /// `d1 != c*u^alpha` (tag-level check; see module docs for parsed forms).
    fn exclude_power_d1(&self, d1: &FunctionDescriptor, alpha: f64) -> Result<(), CatalogError> {
        let bad = match d1.kind() {
            Kind::Power { exponent } => *exponent == alpha,
            Kind::Affine { intercept, slope } => {
                alpha == 1.0 && *intercept == 0.0 && *slope != 0.0
            }
            _ => false,
        };
        self.exclude_tag(
            bad,
            &format!("d1 = c*u^{alpha} is excluded (operator degenerates to a Lie symmetry)"),
        )
    }

    fn exclude_exp_d1(&self, d1: &FunctionDescriptor, rate: f64) -> Result<(), CatalogError> {
        let bad = matches!(d1.kind(), Kind::Exponential { rate: r } if *r == rate);
        self.exclude_tag(
            bad,
            &format!("d1 = c*exp({rate}*u) is excluded (operator degenerates to a Lie symmetry)"),
        )
    }

    fn profile(&self, lin: f64, constant: f64) -> Result<FunctionDescriptor, CatalogError> {
        let [p0, dp0] = self
            .inst
            .p_init
            .ok_or(CatalogError::NeedsProfileInit { case: self.case() })?;
        solve_p(1.0, lin, constant, p0, dp0, self.inst.p_range, self.inst.p_step)
    }
}

type Pair = (RDSystem, SymmetryOperator);

fn operator(
    xi0: FunctionDescriptor,
    r1: FunctionDescriptor,
    p1: FunctionDescriptor,
    r2: FunctionDescriptor,
    p2: FunctionDescriptor,
) -> Result<SymmetryOperator, CatalogError> {
    SymmetryOperator::new(xi0, zero_x(), r1, p1, zero2(), r2, p2)
}

pub(crate) fn build(inst: &Instantiation, delta: f64) -> Result<Pair, CatalogError> {
    let ctx = Ctx { inst, delta };
    match inst.case {
        1 => case01(&ctx),
        2 => case02(&ctx),
        3 => case03(&ctx),
        4 => case04(&ctx),
        5 => case05(&ctx),
        6 => case06(&ctx),
        7 => case07(&ctx),
        8 => case08(&ctx),
        9 => case09(&ctx),
        10 => case10(&ctx),
        11 => case11(&ctx),
        12 => case12(&ctx),
        13 => case13(&ctx),
        14 => case14(&ctx),
        15 => case15(&ctx),
        16 => case16(&ctx),
        17 => case17(&ctx),
        18 => case18(&ctx),
        19 => case19(&ctx),
        20 => case20(&ctx),
        21 => case21(&ctx),
        other => Err(CatalogError::UnknownCase(other)),
    }
}

pub(crate) fn warnings(inst: &Instantiation) -> Vec<String> {
    let mut out = Vec::new();
    if matches!(inst.case, 1..=4) {
        if let Some(d1) = inst.functions.get("d1") {
            let tagged = matches!(
                d1.kind(),
                Kind::Power { .. }
                    | Kind::Exponential { .. }
                    | Kind::Affine { .. }
                    | Kind::Constant { .. }
            );
            if !tagged {
                out.push(format!(
                    "case {}: cannot decide the d1 form exclusion for a non-tagged \
                     function; the residual certification will flag a violation",
                    inst.case
                ));
            }
        }
    }
    out
}

/// d2 = v^beta, C1 = u(f(w) - d1/alpha), C2 = v(g(w) - v^beta/beta) with
/// invariant argument w = v^beta u^(-alpha); Q = e^t(∂t + u/alpha ∂u + v/beta ∂v).
fn case01(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    let beta = ctx.param("beta")?;
    ctx.require(alpha * beta != 0.0, "alpha*beta != 0")?;
    let d1 = ctx.func("d1")?;
    ctx.exclude_power_d1(d1, alpha)?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let w = vc().powc(beta) * uc().powc(-alpha);
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::power(beta, "v"),
        kin(uc() * (ap(f, w.clone()) - k(1.0 / alpha - ctx.delta) * ap(d1, uc()))),
        kin(vc() * (ap(g, w) - k(1.0 / beta) * vc().powc(beta))),
    )?;
    let op = operator(
        tfun(exp_t(1.0)),
        coeff(k(1.0 / alpha) * exp_t(1.0)),
        zero2(),
        coeff(k(1.0 / beta) * exp_t(1.0)),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d2 = e^v, w = e^v u^(-alpha); Q = e^(alpha t)(∂t + u ∂u + alpha ∂v).
fn case02(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    ctx.require(alpha != 0.0, "alpha != 0")?;
    let d1 = ctx.func("d1")?;
    ctx.exclude_power_d1(d1, alpha)?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let w = vc().exp() * uc().powc(-alpha);
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(uc() * (ap(f, w.clone()) - k(1.0 - ctx.delta) * ap(d1, uc()))),
        kin(ap(g, w) - k(alpha) * vc().exp()),
    )?;
    let op = operator(
        tfun(exp_t(alpha)),
        coeff(exp_t(alpha)),
        zero2(),
        zero2(),
        coeff(k(alpha) * exp_t(alpha)),
    )?;
    Ok((sys, op))
}

/// d2 = e^v, w = v - alpha u; Q = e^(alpha t)(∂t + ∂u + alpha ∂v).
fn case03(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    ctx.require(alpha != 0.0, "alpha != 0")?;
    let d1 = ctx.func("d1")?;
    ctx.exclude_exp_d1(d1, alpha)?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let w = vc() - k(alpha) * uc();
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(ap(f, w.clone()) - k(1.0 - ctx.delta) * ap(d1, uc())),
        kin(ap(g, w) - k(alpha) * vc().exp()),
    )?;
    let op = operator(
        tfun(exp_t(alpha)),
        zero2(),
        coeff(exp_t(alpha)),
        zero2(),
        coeff(k(alpha) * exp_t(alpha)),
    )?;
    Ok((sys, op))
}

/// d2 = v^beta, w = v^beta e^(-u); Q = e^t(∂t + ∂u + v/beta ∂v).
fn case04(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let beta = ctx.param("beta")?;
    ctx.require(beta != 0.0, "beta != 0")?;
    let d1 = ctx.func("d1")?;
    ctx.exclude_exp_d1(d1, 1.0)?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let w = vc().powc(beta) * (k(-1.0) * uc()).exp();
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::power(beta, "v"),
        kin(ap(f, w.clone()) - k(1.0 - ctx.delta) * ap(d1, uc())),
        kin(vc() * (ap(g, w) - k(1.0 / beta) * vc().powc(beta))),
    )?;
    let op = operator(
        tfun(exp_t(1.0)),
        zero2(),
        coeff(exp_t(1.0)),
        coeff(k(1.0 / beta) * exp_t(1.0)),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d2 = v^beta; Q = (lambda + e^(alpha t)) ∂t + (alpha/beta) e^(alpha t) v ∂v.
fn case05(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    let beta = ctx.param("beta")?;
    let lambda = ctx.param("lambda")?;
    ctx.require(alpha * beta != 0.0, "alpha*beta != 0")?;
    let d1 = ctx.func("d1")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::power(beta, "v"),
        kin(ap(f, uc()) + k(ctx.delta) * vc()),
        kin(vc() * (ap(g, uc()) - k(alpha / beta) * vc().powc(beta))),
    )?;
    let op = operator(
        tfun(k(lambda) + exp_t(alpha)),
        zero2(),
        zero2(),
        coeff(k(alpha / beta) * exp_t(alpha)),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d2 = e^v; Q = (lambda + e^(alpha t)) ∂t + alpha e^(alpha t) ∂v.
fn case06(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    let lambda = ctx.param("lambda")?;
    ctx.require(alpha != 0.0, "alpha != 0")?;
    let d1 = ctx.func("d1")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(ap(f, uc()) + k(ctx.delta) * vc()),
        kin(ap(g, uc()) - k(alpha) * vc().exp()),
    )?;
    let op = operator(
        tfun(k(lambda) + exp_t(alpha)),
        zero2(),
        zero2(),
        zero2(),
        coeff(k(alpha) * exp_t(alpha)),
    )?;
    Ok((sys, op))
}

/// d2 = v^beta; Q = t ∂t + v/beta ∂v.
fn case07(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let beta = ctx.param("beta")?;
    ctx.require(beta != 0.0, "beta != 0")?;
    let d1 = ctx.func("d1")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::power(beta, "v"),
        kin(ap(f, uc()) + k(ctx.delta) * vc()),
        kin(vc() * ap(g, uc())),
    )?;
    let op = operator(
        FunctionDescriptor::affine(0.0, 1.0, "t"),
        zero2(),
        zero2(),
        FunctionDescriptor::constant(1.0 / beta, &["t", "x"]),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d2 = e^v; Q = t ∂t + ∂v.
fn case08(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let d1 = ctx.func("d1")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        d1.clone(),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(ap(f, uc()) + k(ctx.delta) * vc()),
        kin(ap(g, uc())),
    )?;
    let op = operator(
        FunctionDescriptor::affine(0.0, 1.0, "t"),
        zero2(),
        zero2(),
        zero2(),
        FunctionDescriptor::constant(1.0, &["t", "x"]),
    )?;
    Ok((sys, op))
}

/// Arbitrary d1, d2; C1 = u(f(v) - alpha d1); Q = ∂t + alpha u ∂u.
fn case09(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    ctx.require(alpha != 0.0, "alpha != 0")?;
    let d1 = ctx.func("d1")?;
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        d1.clone(),
        d2.clone(),
        kin(uc() * (ap(f, vc()) - k(alpha - ctx.delta) * ap(d1, uc()))),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        FunctionDescriptor::constant(alpha, &["t", "x"]),
        zero2(),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = u^beta; Q = ∂t + (alpha/beta) e^(alpha t)/(lambda + e^(alpha t)) u ∂u.
fn case10(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    let beta = ctx.param("beta")?;
    let lambda = ctx.param("lambda")?;
    ctx.require(lambda * alpha * beta != 0.0, "lambda*alpha*beta != 0")?;
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(beta, "u"),
        d2.clone(),
        kin(uc() * ap(f, vc()) - k(alpha / beta - ctx.delta) * uc().powc(beta + 1.0)),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        coeff(k(alpha / beta) * exp_t(alpha) / (k(lambda) + exp_t(alpha))),
        zero2(),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = u^beta; Q = ∂t + u/(beta t) ∂u.
fn case11(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let beta = ctx.param("beta")?;
    ctx.require(beta != 0.0, "beta != 0")?;
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(beta, "u"),
        d2.clone(),
        kin(uc() * ap(f, vc()) + k(ctx.delta) * uc().powc(beta + 1.0)),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        coeff(k(1.0 / beta) / tc()),
        zero2(),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// C1 = f(v) - alpha d1(u); Q = ∂t + alpha ∂u.
fn case12(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    ctx.require(alpha != 0.0, "alpha != 0")?;
    let d1 = ctx.func("d1")?;
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        d1.clone(),
        d2.clone(),
        kin(ap(f, vc()) - k(alpha - ctx.delta) * ap(d1, uc())),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        zero2(),
        FunctionDescriptor::constant(alpha, &["t", "x"]),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = e^u; Q = ∂t + alpha e^(alpha t)/(lambda + e^(alpha t)) ∂u.
fn case13(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    let lambda = ctx.param("lambda")?;
    ctx.require(lambda * alpha != 0.0, "lambda*alpha != 0")?;
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::exponential(1.0, "u"),
        d2.clone(),
        kin(ap(f, vc()) - k(alpha - ctx.delta) * uc().exp()),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        zero2(),
        coeff(k(alpha) * exp_t(alpha) / (k(lambda) + exp_t(alpha))),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = e^u; Q = ∂t + 1/t ∂u.
fn case14(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::exponential(1.0, "u"),
        d2.clone(),
        kin(ap(f, vc()) + k(ctx.delta) * uc().exp()),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        zero2(),
        coeff(k(1.0) / tc()),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = u; C1 = f(v) + alpha u; Q = ∂t + p(x) ∂u with p'' = p^2 + alpha p.
fn case15(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let alpha = ctx.param("alpha")?;
    if let Some([p0, dp0]) = ctx.inst.p_init {
        // p ≡ 0 would reduce the operator to plain time translation
        ctx.require(p0 != 0.0 || dp0 != 0.0, "p_init != (0, 0)")?;
    }
    let profile = ctx.profile(alpha, 0.0)?;
    let d2 = ctx.func("d2")?;
    let f = ctx.func("f")?;
    let g = ctx.func("g")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(1.0, "u"),
        d2.clone(),
        kin(ap(f, vc()) + k(alpha + ctx.delta) * uc()),
        kin(ap(g, vc())),
    )?;
    let op = operator(
        FunctionDescriptor::constant(1.0, &["t"]),
        zero2(),
        coeff(ap(&profile, xc())),
        zero2(),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = u, d2 = e^v, linear kinetics; Q = e^t(∂t + p(x) ∂u + ∂v).
fn case16(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let a1 = ctx.param("alpha1")?;
    let a2 = ctx.param("alpha2")?;
    let a3 = ctx.param("alpha3")?;
    let a4 = ctx.param("alpha4")?;
    ctx.require(a1 != 0.0, "alpha1 != 0")?;
    let profile = ctx.profile(a2, a1)?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(1.0, "u"),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(k(a1 + ctx.delta) * vc() + k(a2) * uc() + k(a3)),
        kin(k(a4) - vc().exp()),
    )?;
    let op = operator(
        tfun(exp_t(1.0)),
        zero2(),
        coeff(exp_t(1.0) * ap(&profile, xc())),
        zero2(),
        coeff(exp_t(1.0)),
    )?;
    Ok((sys, op))
}

/// d1 = u, d2 = v^beta; C1 = alpha1 ln v + alpha2 u + alpha3;
/// Q = e^(beta t)(∂t + p(x) ∂u + v ∂v).
fn case17(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let a1 = ctx.param("alpha1")?;
    let a2 = ctx.param("alpha2")?;
    let a3 = ctx.param("alpha3")?;
    let a4 = ctx.param("alpha4")?;
    let beta = ctx.param("beta")?;
    ctx.require(a1 * beta != 0.0, "alpha1*beta != 0")?;
    let profile = ctx.profile(a2, a1)?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(1.0, "u"),
        FunctionDescriptor::power(beta, "v"),
        kin(k(a1 + ctx.delta) * vc().ln() + k(a2) * uc() + k(a3)),
        kin(vc() * (k(a4) - vc().powc(beta))),
    )?;
    let op = operator(
        tfun(exp_t(beta)),
        zero2(),
        coeff(exp_t(beta) * ap(&profile, xc())),
        coeff(exp_t(beta)),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = u, d2 = v^beta; C1 = alpha2 v^(1/alpha1) + alpha3 u + alpha4 - u^2;
/// Q = e^(alpha1 beta t)(∂t + (p(x) + u) ∂u + alpha1 v ∂v).
fn case18(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let a1 = ctx.param("alpha1")?;
    let a2 = ctx.param("alpha2")?;
    let a3 = ctx.param("alpha3")?;
    let a4 = ctx.param("alpha4")?;
    let a5 = ctx.param("alpha5")?;
    let beta = ctx.param("beta")?;
    ctx.require(a1 * beta != 0.0, "alpha1*beta != 0")?;
    let profile = ctx.profile(a3, -a4)?;
    let rate = a1 * beta;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(1.0, "u"),
        FunctionDescriptor::power(beta, "v"),
        kin(k(a2) * vc().powc(1.0 / a1) + k(a3) * uc() + k(a4 + ctx.delta)
            - uc().powc(2.0)),
        kin(vc() * (k(a5) - k(a1) * vc().powc(beta))),
    )?;
    let op = operator(
        tfun(exp_t(rate)),
        coeff(exp_t(rate)),
        coeff(exp_t(rate) * ap(&profile, xc())),
        coeff(k(a1) * exp_t(rate)),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = u, d2 = e^v; C1 = alpha2 e^(v/alpha1) + alpha3 u + alpha4 - u^2;
/// Q = e^(alpha1 t)(∂t + (p(x) + u) ∂u + alpha1 ∂v).
fn case19(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let a1 = ctx.param("alpha1")?;
    let a2 = ctx.param("alpha2")?;
    let a3 = ctx.param("alpha3")?;
    let a4 = ctx.param("alpha4")?;
    let a5 = ctx.param("alpha5")?;
    ctx.require(a1 * a2 != 0.0, "alpha1*alpha2 != 0")?;
    let profile = ctx.profile(a3, -a4)?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(1.0, "u"),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(k(a2) * (k(1.0 / a1) * vc()).exp() + k(a3) * uc() + k(a4 + ctx.delta)
            - uc().powc(2.0)),
        kin(k(a5) - k(a1) * vc().exp()),
    )?;
    let op = operator(
        tfun(exp_t(a1)),
        coeff(exp_t(a1)),
        coeff(exp_t(a1) * ap(&profile, xc())),
        zero2(),
        coeff(k(a1) * exp_t(a1)),
    )?;
    Ok((sys, op))
}

/// d1 = 1/u, d2 = v^beta; C1 = alpha1 v^(-beta) + alpha2/u;
/// Q = t ∂t - (u + alpha2 t) ∂u + v/beta ∂v.
fn case20(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let a1 = ctx.param("alpha1")?;
    let a2 = ctx.param("alpha2")?;
    let a3 = ctx.param("alpha3")?;
    let beta = ctx.param("beta")?;
    ctx.require(a1 * a2 * beta != 0.0, "alpha1*alpha2*beta != 0")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(-1.0, "u"),
        FunctionDescriptor::power(beta, "v"),
        kin(k(a1) * vc().powc(-beta) + k(a2 + ctx.delta) * uc().powc(-1.0)),
        kin(k(a3) * vc()),
    )?;
    let op = operator(
        FunctionDescriptor::affine(0.0, 1.0, "t"),
        FunctionDescriptor::constant(-1.0, &["t", "x"]),
        coeff(k(-a2) * tc()),
        FunctionDescriptor::constant(1.0 / beta, &["t", "x"]),
        zero2(),
    )?;
    Ok((sys, op))
}

/// d1 = 1/u, d2 = e^v; C1 = alpha1 e^(-v) + alpha2/u;
/// Q = t ∂t - (u + alpha2 t) ∂u + ∂v.
fn case21(ctx: &Ctx) -> Result<Pair, CatalogError> {
    let a1 = ctx.param("alpha1")?;
    let a2 = ctx.param("alpha2")?;
    let a3 = ctx.param("alpha3")?;
    ctx.require(a1 * a2 != 0.0, "alpha1*alpha2 != 0")?;
    let sys = RDSystem::transformed(
        FunctionDescriptor::power(-1.0, "u"),
        FunctionDescriptor::exponential(1.0, "v"),
        kin(k(a1) * (k(-1.0) * vc()).exp() + k(a2 + ctx.delta) * uc().powc(-1.0)),
        kin(Field::konst(a3)),
    )?;
    let op = operator(
        FunctionDescriptor::affine(0.0, 1.0, "t"),
        FunctionDescriptor::constant(-1.0, &["t", "x"]),
        coeff(k(-a2) * tc()),
        zero2(),
        FunctionDescriptor::constant(1.0, &["t", "x"]),
    )?;
    Ok((sys, op))
}
