//! The 21-entry table of reaction-diffusion systems (in transformed form)
//! paired with the conditional-symmetry operators they admit.
//!
//! Entries are instantiated from named parameters and user-supplied
//! functions; restriction predicates are checked up front and the produced
//! pair is meant to be certified through [`crate::detsys`]. Five entries
//! carry an operator coefficient `p(x)` defined only through the ODE
//! `p'' = p^2 + a p + b`, solved here on a grid (see [`solve_p`]).

mod cases;
mod pode;

pub use pode::solve_p;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{EvalError, Field, FunctionDescriptor, Kind};
use crate::kirchhoff::{KirchhoffError, RDSystem};

/// Operator `Q = xi0(t) ∂_t + xi1(x) ∂_x + eta1 ∂_u + eta2 ∂_v` with the
/// structured coefficients `eta1 = r1(t,x) u + p1(t,x)` and
/// `eta2 = q(t,x) u + r2(t,x) v + p2(t,x)`.
#[derive(Debug, Clone)]
pub struct SymmetryOperator {
    pub xi0: FunctionDescriptor,
    pub xi1: FunctionDescriptor,
    pub r1: FunctionDescriptor,
    pub p1: FunctionDescriptor,
    pub q: FunctionDescriptor,
    pub r2: FunctionDescriptor,
    pub p2: FunctionDescriptor,
}

impl SymmetryOperator {
    pub fn new(
        xi0: FunctionDescriptor,
        xi1: FunctionDescriptor,
        r1: FunctionDescriptor,
        p1: FunctionDescriptor,
        q: FunctionDescriptor,
        r2: FunctionDescriptor,
        p2: FunctionDescriptor,
    ) -> Result<Self, CatalogError> {
        let check = |f: &FunctionDescriptor, role: &'static str, arity: usize| {
            if f.arity() != arity {
                Err(CatalogError::CoefficientArity { role, expected: arity, got: f.arity() })
            } else {
                Ok(())
            }
        };
        check(&xi0, "xi0", 1)?;
        check(&xi1, "xi1", 1)?;
        for (f, role) in [(&r1, "r1"), (&p1, "p1"), (&q, "q"), (&r2, "r2"), (&p2, "p2")] {
            check(f, role, 2)?;
        }
        Ok(Self { xi0, xi1, r1, p1, q, r2, p2 })
    }

    /// Time-translation generator: `∂_t`.
    pub fn time_translation() -> Self {
        Self {
            xi0: FunctionDescriptor::constant(1.0, &["t"]),
            xi1: FunctionDescriptor::constant(0.0, &["x"]),
            r1: zero2(),
            p1: zero2(),
            q: zero2(),
            r2: zero2(),
            p2: zero2(),
        }
    }

    /// Space-translation generator: `∂_x`.
    pub fn space_translation() -> Self {
        Self {
            xi0: FunctionDescriptor::constant(0.0, &["t"]),
            xi1: FunctionDescriptor::constant(1.0, &["x"]),
            r1: zero2(),
            p1: zero2(),
            q: zero2(),
            r2: zero2(),
            p2: zero2(),
        }
    }

    pub fn eta1(&self, t: f64, x: f64, u: f64) -> Result<f64, EvalError> {
        Ok(self.r1.eval(&[t, x])? * u + self.p1.eval(&[t, x])?)
    }

    pub fn eta2(&self, t: f64, x: f64, u: f64, v: f64) -> Result<f64, EvalError> {
        Ok(self.q.eval(&[t, x])? * u + self.r2.eval(&[t, x])? * v + self.p2.eval(&[t, x])?)
    }

    /// `Q(w) = xi0 w_t + xi1 w_x - eta` for a scalar component.
    pub fn characteristic(
        &self,
        t: f64,
        x: f64,
        w_t: f64,
        w_x: f64,
        eta: f64,
    ) -> Result<f64, EvalError> {
        Ok(self.xi0.eval1(t)? * w_t + self.xi1.eval1(x)? * w_x - eta)
    }
}

pub(crate) fn zero2() -> FunctionDescriptor {
    FunctionDescriptor::constant(0.0, &["t", "x"])
}

#[derive(Debug, Clone, Error)]
pub enum CatalogError {
    #[error("unknown case {0} (valid: 1..=21)")]
    UnknownCase(u8),
    #[error("case {case}: restriction {predicate} violated")]
    Restriction { case: u8, predicate: String },
    #[error("case {case}: missing parameter `{name}`")]
    MissingParam { case: u8, name: String },
    #[error("case {case}: missing user function `{name}`")]
    MissingFunction { case: u8, name: String },
    #[error("case {case}: {reason}")]
    ExcludedForm { case: u8, reason: String },
    #[error("case {case}: entry needs initial data p_init = [p(x0), p'(x0)]")]
    NeedsProfileInit { case: u8 },
    #[error("profile ODE blew up at x = {x} (|p| > {limit:.0e})")]
    ProfileBlowUp { x: f64, limit: f64 },
    #[error("operator coefficient {role}: expected arity {expected}, got {got}")]
    CoefficientArity { role: &'static str, expected: usize, got: usize },
    #[error("equivalence scaling constant {name} must be nonzero")]
    ZeroScale { name: &'static str },
    #[error("swap requires the mixed coefficient q to vanish identically")]
    SwapNeedsZeroQ,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    System(#[from] KirchhoffError),
}

/// Static description of one table entry.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CaseInfo {
    pub case_id: u8,
    /// Parameter slot names, e.g. `alpha`, `beta`, `lambda`, `alpha1`..
    pub params: &'static [&'static str],
    /// User-function slots (subset of `d1`, `d2`, `f`, `g`).
    pub functions: &'static [&'static str],
    /// Inequality restrictions on the parameters.
    pub restrictions: &'static str,
    /// For ODE-defined entries, the constraint satisfied by `p(x)`.
    pub profile_ode: Option<&'static str>,
}

impl CaseInfo {
    pub fn profile_is_ode_defined(&self) -> bool {
        self.profile_ode.is_some()
    }
}

/// Metadata for all 21 cases.
pub fn list_cases() -> Vec<CaseInfo> {
    cases::infos()
}

/// Everything needed to instantiate one case. Mirrors the JSON schema
/// `{case, params: {name: number}, functions: {name: expr}, p_init: [p0, dp0]}`.
#[derive(Debug, Clone)]
pub struct Instantiation {
    pub case: u8,
    pub params: BTreeMap<String, f64>,
    pub functions: BTreeMap<String, FunctionDescriptor>,
    pub p_init: Option<[f64; 2]>,
    /// Grid on which the profile ODE is solved (entries 15-19).
    pub p_range: (f64, f64),
    pub p_step: f64,
}

impl Instantiation {
    pub fn new(case: u8) -> Self {
        Self {
            case,
            params: BTreeMap::new(),
            functions: BTreeMap::new(),
            p_init: None,
            p_range: (0.0, 2.5),
            p_step: 1e-3,
        }
    }

    pub fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn function(mut self, name: &str, f: FunctionDescriptor) -> Self {
        self.functions.insert(name.to_string(), f);
        self
    }

    pub fn p_init(mut self, p0: f64, dp0: f64) -> Self {
        self.p_init = Some([p0, dp0]);
        self
    }
}

/// Builds the (system, operator) pair for the requested case, checking the
/// table's restriction predicates and the form exclusions first.
pub fn instantiate(inst: &Instantiation) -> Result<(RDSystem, SymmetryOperator), CatalogError> {
    cases::build(inst, 0.0)
}

/// Same as [`instantiate`] but perturbs the case's structural kinetic
/// coefficient by `delta`, leaving the operator untouched. Used to confirm
/// that the residual certification actually rejects wrong kinetics.
pub fn instantiate_mutated(
    inst: &Instantiation,
    delta: f64,
) -> Result<(RDSystem, SymmetryOperator), CatalogError> {
    cases::build(inst, delta)
}

/// Warnings for exclusions that can only be checked on closed-form tags
/// (functional-form equality is undecidable for parsed expressions).
pub fn exclusion_warnings(inst: &Instantiation) -> Vec<String> {
    cases::warnings(inst)
}

/// Draws a random admissible instantiation of a case: parameters away from
/// the restriction boundaries and user functions from a pool that avoids
/// every caption exclusion. Used by the certification sweep.
pub fn random_instantiation<R: rand::Rng>(
    case: u8,
    rng: &mut R,
) -> Result<Instantiation, CatalogError> {
    let info = list_cases()
        .into_iter()
        .find(|i| i.case_id == case)
        .ok_or(CatalogError::UnknownCase(case))?;

    // magnitude in [0.4, 1.6] with random sign: clear of zero restrictions
    let draw_nz = |rng: &mut R| {
        let mag = rng.gen_range(0.4..1.6);
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    };

    let mut inst = Instantiation::new(case);
    for &name in info.params {
        let value = match name {
            // keep xi0 = lambda + e^(alpha t) away from zeros on [0.1, 2]
            "lambda" => rng.gen_range(0.3..1.5),
            _ => draw_nz(rng),
        };
        inst.params.insert(name.to_string(), value);
    }

    // none of these is a pure power or pure exponential, so the caption
    // exclusions hold for every parameter draw
    let d1_pool = ["1+u^2", "0.5+u", "1/(1+0.5*u)"];
    let d2_pool = ["1+v^2", "0.5+v", "exp(0.4*v)"];
    let fg_pool = ["0.4+0.25*w", "1+0.2*sin(w)", "0.8*exp(-0.3*w)"];
    for &name in info.functions {
        let src = match name {
            "d1" => d1_pool[rng.gen_range(0..d1_pool.len())],
            "d2" => d2_pool[rng.gen_range(0..d2_pool.len())],
            _ => fg_pool[rng.gen_range(0..fg_pool.len())],
        };
        let vars: &[&str] = match name {
            "d1" => &["u"],
            "d2" => &["v"],
            _ => &["w"],
        };
        inst.functions.insert(
            name.to_string(),
            crate::expr::parse_expr(src, vars).expect("pool expressions parse"),
        );
    }

    if info.profile_is_ode_defined() {
        // small initial data keeps the profile ODE bounded over the grid
        let p0 = rng.gen_range(0.05..0.15);
        let dp0 = rng.gen_range(-0.12..-0.04);
        inst.p_init = Some([p0, dp0]);
    }
    Ok(inst)
}

/// The affine change of variables `t -> c_t t + s_t`, ..., `v -> c_v v + s_v`
/// mapping systems of the class to systems of the class.
#[derive(Debug, Clone, Copy)]
pub struct Equivalence {
    pub scale: [f64; 4],
    pub shift: [f64; 4],
}

impl Equivalence {
    pub fn identity() -> Self {
        Self { scale: [1.0; 4], shift: [0.0; 4] }
    }

    pub fn from_constants(c: [f64; 8]) -> Self {
        Self { scale: [c[0], c[2], c[4], c[6]], shift: [c[1], c[3], c[5], c[7]] }
    }
}

// Old coordinate expressed in the new one: (coord - shift) / scale.
fn pullback(i: usize, scale: f64, shift: f64) -> Field {
    (Field::coord(i) - Field::konst(shift)) / Field::konst(scale)
}

/// Rewrites a transformed-form pair under an affine equivalence. Residuals
/// of the determining equations vanish for the image whenever they vanish
/// for the source.
pub fn apply_equivalence(
    sys: &RDSystem,
    op: &SymmetryOperator,
    eq: &Equivalence,
) -> Result<(RDSystem, SymmetryOperator), CatalogError> {
    for (i, name) in ["C1 (time)", "C3 (space)", "C5 (u)", "C7 (v)"].iter().enumerate() {
        if eq.scale[i] == 0.0 {
            return Err(CatalogError::ZeroScale { name });
        }
    }
    let [ct, cx, cu, cv] = eq.scale;
    let [st, sx, su, sv] = eq.shift;

    // Kinetics live on coordinates (u, v) = (0, 1); operator coefficients
    // on (t, x) = (0, 1).
    let pull_u = pullback(0, cu, su);
    let pull_v = pullback(1, cv, sv);
    let pull_t = pullback(0, ct, st);
    let pull_x = pullback(1, cx, sx);

    let diff_u = FunctionDescriptor::from_field(
        Field::konst(ct / (cx * cx)) * Field::apply1(&sys.diff_u, pullback(0, cu, su)),
        &["u"],
    );
    let diff_v = FunctionDescriptor::from_field(
        Field::konst(ct / (cx * cx)) * Field::apply1(&sys.diff_v, pullback(0, cv, sv)),
        &["v"],
    );
    let kin_u = FunctionDescriptor::from_field(
        Field::konst(cu / (cx * cx))
            * Field::apply(&sys.kin_u, vec![pull_u.clone(), pull_v.clone()]),
        &["u", "v"],
    );
    let kin_v = FunctionDescriptor::from_field(
        Field::konst(cv / (cx * cx))
            * Field::apply(&sys.kin_v, vec![pull_u.clone(), pull_v.clone()]),
        &["u", "v"],
    );
    let new_sys = RDSystem { form: sys.form, diff_u, diff_v, kin_u, kin_v };

    let comp = |f: &FunctionDescriptor| Field::apply(f, vec![pull_t.clone(), pull_x.clone()]);
    let xi0 = FunctionDescriptor::from_field(
        Field::konst(ct) * Field::apply1(&op.xi0, pullback(0, ct, st)),
        &["t"],
    );
    let xi1 = FunctionDescriptor::from_field(
        Field::konst(cx) * Field::apply1(&op.xi1, pullback(0, cx, sx)),
        &["x"],
    );
    let r1 = FunctionDescriptor::from_field(comp(&op.r1), &["t", "x"]);
    let p1 = FunctionDescriptor::from_field(
        Field::konst(cu) * comp(&op.p1) - Field::konst(su) * comp(&op.r1),
        &["t", "x"],
    );
    let q = FunctionDescriptor::from_field(Field::konst(cv / cu) * comp(&op.q), &["t", "x"]);
    let r2 = FunctionDescriptor::from_field(comp(&op.r2), &["t", "x"]);
    let p2 = FunctionDescriptor::from_field(
        Field::konst(cv) * comp(&op.p2)
            - Field::konst(su * cv / cu) * comp(&op.q)
            - Field::konst(sv) * comp(&op.r2),
        &["t", "x"],
    );
    let new_op = SymmetryOperator::new(xi0, xi1, r1, p1, q, r2, p2)?;
    Ok((new_sys, new_op))
}

/// The discrete `u <-> v` swap. Maps a pair certified on the `Q(u)`-augmented
/// manifold to one certified on the swapped manifold; applying it twice is
/// the identity.
pub fn apply_swap(
    sys: &RDSystem,
    op: &SymmetryOperator,
) -> Result<(RDSystem, SymmetryOperator), CatalogError> {
    if !coeff_is_zero(&op.q) {
        return Err(CatalogError::SwapNeedsZeroQ);
    }
    let flip = |f: &FunctionDescriptor| {
        FunctionDescriptor::from_field(
            Field::apply(f, vec![Field::coord(1), Field::coord(0)]),
            &["u", "v"],
        )
    };
    let new_sys = RDSystem {
        form: sys.form,
        diff_u: sys.diff_v.clone(),
        diff_v: sys.diff_u.clone(),
        kin_u: flip(&sys.kin_v),
        kin_v: flip(&sys.kin_u),
    };
    let new_op = SymmetryOperator::new(
        op.xi0.clone(),
        op.xi1.clone(),
        op.r2.clone(),
        op.p2.clone(),
        zero2(),
        op.r1.clone(),
        op.p1.clone(),
    )?;
    Ok((new_sys, new_op))
}

fn coeff_is_zero(f: &FunctionDescriptor) -> bool {
    match f.kind() {
        Kind::Constant { value } => *value == 0.0,
        Kind::Affine { intercept, slope } => *intercept == 0.0 && *slope == 0.0,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn listing_has_21_entries() {
        let infos = list_cases();
        assert_eq!(infos.len(), 21);
        assert_eq!(infos[0].case_id, 1);
        assert_eq!(infos[20].case_id, 21);
    }

    #[test]
    fn case_15_is_ode_defined() {
        let infos = list_cases();
        let c15 = &infos[14];
        assert!(c15.profile_is_ode_defined());
        assert_eq!(c15.profile_ode.unwrap(), "p'' = p^2 + alpha*p");
    }

    #[test]
    fn case_9_parameter_slots() {
        let infos = list_cases();
        let c9 = &infos[8];
        assert_eq!(c9.params, &["alpha"]);
        assert_eq!(c9.functions, &["d1", "d2", "f", "g"]);
        assert_eq!(c9.restrictions, "alpha != 0");
    }

    #[test]
    fn case_1_unit_parameters() {
        // alpha = beta = 1, f = g = 0: C1 = -u d1(u), C2 = -v^2.
        let inst = Instantiation::new(1)
            .param("alpha", 1.0)
            .param("beta", 1.0)
            .function("d1", parse_expr("1+u^2", &["u"]).unwrap())
            .function("f", FunctionDescriptor::constant(0.0, &["w"]))
            .function("g", FunctionDescriptor::constant(0.0, &["w"]));
        let (sys, op) = instantiate(&inst).unwrap();
        for (u, v) in [(0.5, 0.7), (1.2, 0.4)] {
            close(sys.kin_u.eval(&[u, v]).unwrap(), -u * (1.0 + u * u), 1e-14);
            close(sys.kin_v.eval(&[u, v]).unwrap(), -v * v, 1e-14);
        }
        // operator: e^t (∂_t + u ∂_u + v ∂_v)
        close(op.xi0.eval1(0.3).unwrap(), 0.3f64.exp(), 1e-15);
        close(op.r1.eval(&[0.3, 0.5]).unwrap(), 0.3f64.exp(), 1e-15);
        close(op.r2.eval(&[0.3, 0.5]).unwrap(), 0.3f64.exp(), 1e-15);
        close(op.p1.eval(&[0.3, 0.5]).unwrap(), 0.0, 0.0);
    }

    #[test]
    fn case_9_restriction_violation() {
        let inst = Instantiation::new(9)
            .param("alpha", 0.0)
            .function("d1", parse_expr("exp(u)", &["u"]).unwrap())
            .function("d2", parse_expr("exp(v)", &["v"]).unwrap())
            .function("f", parse_expr("w", &["w"]).unwrap())
            .function("g", parse_expr("w", &["w"]).unwrap());
        let err = instantiate(&inst).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpha != 0"), "got: {msg}");
    }

    #[test]
    fn case_21_concrete_coefficients() {
        let inst = Instantiation::new(21)
            .param("alpha1", 1.0)
            .param("alpha2", 1.0)
            .param("alpha3", 0.0);
        let (sys, op) = instantiate(&inst).unwrap();
        for (u, v) in [(0.4, 0.9), (1.5, 0.2)] {
            close(
                sys.kin_u.eval(&[u, v]).unwrap(),
                (-v as f64).exp() + 1.0 / u,
                1e-14,
            );
            close(sys.kin_v.eval(&[u, v]).unwrap(), 0.0, 0.0);
        }
        // operator t ∂_t - (u + t) ∂_u + ∂_v
        close(op.xi0.eval1(1.7).unwrap(), 1.7, 1e-15);
        close(op.r1.eval(&[1.7, 0.3]).unwrap(), -1.0, 0.0);
        close(op.p1.eval(&[1.7, 0.3]).unwrap(), -1.7, 1e-15);
        close(op.p2.eval(&[1.7, 0.3]).unwrap(), 1.0, 0.0);
    }

    #[test]
    fn identity_equivalence_is_identity() {
        let inst = Instantiation::new(12)
            .param("alpha", 0.8)
            .function("d1", parse_expr("exp(u)", &["u"]).unwrap())
            .function("d2", parse_expr("1+v^2", &["v"]).unwrap())
            .function("f", parse_expr("sin(w)", &["w"]).unwrap())
            .function("g", parse_expr("cos(w)", &["w"]).unwrap());
        let (sys, op) = instantiate(&inst).unwrap();
        let (sys2, op2) = apply_equivalence(&sys, &op, &Equivalence::identity()).unwrap();
        for (u, v) in [(0.5, 0.6), (1.1, 1.4)] {
            close(
                sys2.kin_u.eval(&[u, v]).unwrap(),
                sys.kin_u.eval(&[u, v]).unwrap(),
                1e-12,
            );
            close(sys2.diff_u.eval1(u).unwrap(), sys.diff_u.eval1(u).unwrap(), 1e-12);
        }
        close(op2.xi0.eval1(0.9).unwrap(), op.xi0.eval1(0.9).unwrap(), 1e-12);
        close(
            op2.p1.eval(&[0.9, 0.2]).unwrap(),
            op.p1.eval(&[0.9, 0.2]).unwrap(),
            1e-12,
        );
    }

    #[test]
    fn swap_twice_is_identity() {
        let inst = Instantiation::new(1)
            .param("alpha", 2.0)
            .param("beta", 0.5)
            .function("d1", parse_expr("exp(u)", &["u"]).unwrap())
            .function("f", parse_expr("0.3*w+1", &["w"]).unwrap())
            .function("g", parse_expr("0.1*w", &["w"]).unwrap());
        let (sys, op) = instantiate(&inst).unwrap();
        let (s1, o1) = apply_swap(&sys, &op).unwrap();
        let (s2, o2) = apply_swap(&s1, &o1).unwrap();
        for (u, v) in [(0.5, 0.6), (1.3, 0.9)] {
            close(
                s2.kin_u.eval(&[u, v]).unwrap(),
                sys.kin_u.eval(&[u, v]).unwrap(),
                1e-13,
            );
            close(
                s2.kin_v.eval(&[u, v]).unwrap(),
                sys.kin_v.eval(&[u, v]).unwrap(),
                1e-13,
            );
            close(s2.diff_v.eval1(v).unwrap(), sys.diff_v.eval1(v).unwrap(), 1e-13);
        }
        close(
            o2.r1.eval(&[0.7, 0.1]).unwrap(),
            op.r1.eval(&[0.7, 0.1]).unwrap(),
            1e-13,
        );
    }

    #[test]
    fn zero_scale_rejected() {
        let inst = Instantiation::new(8)
            .function("d1", parse_expr("exp(u)", &["u"]).unwrap())
            .function("f", parse_expr("w", &["w"]).unwrap())
            .function("g", parse_expr("w", &["w"]).unwrap());
        let (sys, op) = instantiate(&inst).unwrap();
        let eq = Equivalence { scale: [1.0, 0.0, 1.0, 1.0], shift: [0.0; 4] };
        assert!(matches!(
            apply_equivalence(&sys, &op, &eq),
            Err(CatalogError::ZeroScale { .. })
        ));
    }

    #[test]
    fn caption_exclusion_rejects_power_d1() {
        let inst = Instantiation::new(1)
            .param("alpha", 1.5)
            .param("beta", 1.0)
            .function("d1", FunctionDescriptor::power(1.5, "u"))
            .function("f", FunctionDescriptor::constant(0.0, &["w"]))
            .function("g", FunctionDescriptor::constant(0.0, &["w"]));
        assert!(matches!(
            instantiate(&inst),
            Err(CatalogError::ExcludedForm { case: 1, .. })
        ));
    }

    #[test]
    fn constant_d1_rejected() {
        let inst = Instantiation::new(9)
            .param("alpha", 1.0)
            .function("d1", FunctionDescriptor::constant(2.0, &["u"]))
            .function("d2", parse_expr("exp(v)", &["v"]).unwrap())
            .function("f", parse_expr("w", &["w"]).unwrap())
            .function("g", parse_expr("w", &["w"]).unwrap());
        assert!(instantiate(&inst).is_err());
    }

    #[test]
    fn case_15_needs_profile_init() {
        let inst = Instantiation::new(15)
            .param("alpha", 0.5)
            .function("d2", parse_expr("exp(v)", &["v"]).unwrap())
            .function("f", parse_expr("w", &["w"]).unwrap())
            .function("g", parse_expr("w", &["w"]).unwrap());
        assert!(matches!(
            instantiate(&inst),
            Err(CatalogError::NeedsProfileInit { case: 15 })
        ));
    }
}
