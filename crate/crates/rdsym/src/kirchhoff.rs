//! The substitution `u = ∫ D1(U) dU` and conversions between the two system
//! forms.
//!
//! Divergence form:   `U_t = [D1(U) U_x]_x + F(U, V)` (and likewise for `V`).
//! Transformed form:  `u_xx = d1(u) u_t + C1(u, v)` with
//! `d1(u) = 1/D1(U(u))` and `C1 = -F` composed with the inverse maps.
//!
//! Power-law diffusivities use the normalization that absorbs the `1/(k+1)`
//! integration constant, so `D(U) = U^k` maps to `u = U^(k+1)` exactly and
//! the exponent identities `k = -γ/(γ+1)` hold literally. Everything else
//! goes through adaptive quadrature (forward) and bracketed root finding
//! (inverse); [`transform_system`] tabulates those maps once on a declared
//! range so the produced coefficient functions stay cheap to evaluate.

use thiserror::Error;

use crate::expr::{EvalError, Field, FunctionDescriptor, GridInterp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemForm {
    Divergence,
    Transformed,
}

/// A two-component reaction-diffusion system in either form. The diffusive
/// pair is univariate, the kinetic pair bivariate in (u, v) / (U, V).
#[derive(Debug, Clone)]
pub struct RDSystem {
    pub form: SystemForm,
    pub diff_u: FunctionDescriptor,
    pub diff_v: FunctionDescriptor,
    pub kin_u: FunctionDescriptor,
    pub kin_v: FunctionDescriptor,
}

#[derive(Debug, Clone, Error)]
pub enum KirchhoffError {
    #[error("{role} must take {expected} argument(s), got {got}")]
    BadArity { role: &'static str, expected: usize, got: usize },
    #[error("diffusivity is not positive at {at} (value {value})")]
    NonPositive { at: f64, value: f64 },
    #[error("integral did not converge to the requested tolerance")]
    Divergent,
    #[error("value {value} outside the range [{lo}, {hi}] of the forward map on the bracket")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("forward map is not strictly increasing on the bracket")]
    NotIncreasing,
    #[error("power-law map needs exponent != -1")]
    LogarithmicExponent,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn check_arity(
    f: &FunctionDescriptor,
    role: &'static str,
    expected: usize,
) -> Result<(), KirchhoffError> {
    if f.arity() != expected {
        return Err(KirchhoffError::BadArity { role, expected, got: f.arity() });
    }
    Ok(())
}

impl RDSystem {
    pub fn divergence(
        diff_u: FunctionDescriptor,
        diff_v: FunctionDescriptor,
        kin_u: FunctionDescriptor,
        kin_v: FunctionDescriptor,
    ) -> Result<Self, KirchhoffError> {
        check_arity(&diff_u, "D1", 1)?;
        check_arity(&diff_v, "D2", 1)?;
        check_arity(&kin_u, "F", 2)?;
        check_arity(&kin_v, "G", 2)?;
        Ok(Self { form: SystemForm::Divergence, diff_u, diff_v, kin_u, kin_v })
    }

    pub fn transformed(
        diff_u: FunctionDescriptor,
        diff_v: FunctionDescriptor,
        kin_u: FunctionDescriptor,
        kin_v: FunctionDescriptor,
    ) -> Result<Self, KirchhoffError> {
        check_arity(&diff_u, "d1", 1)?;
        check_arity(&diff_v, "d2", 1)?;
        check_arity(&kin_u, "C1", 2)?;
        check_arity(&kin_v, "C2", 2)?;
        Ok(Self { form: SystemForm::Transformed, diff_u, diff_v, kin_u, kin_v })
    }
}

/// Integration-constant convention for the forward map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Plain `∫_{s0}^{s} D` from the reference point.
    Raw,
    /// Power-law convention: `D = s^k` maps to `s^(k+1)` (the `1/(k+1)`
    /// factor is absorbed). Only defined for power-tagged diffusivities.
    PowerLaw,
}

/// Adaptive Simpson quadrature of a positive integrand. Positivity is
/// checked at every evaluation point.
fn integrate_positive(
    d: &FunctionDescriptor,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, KirchhoffError> {
    if a == b {
        return Ok(0.0);
    }
    // zeros at isolated points (e.g. a power law at the origin) are
    // integrable; only sign changes invalidate the map
    let eval = |s: f64| -> Result<f64, KirchhoffError> {
        let v = d.eval1(s)?;
        if v < 0.0 {
            return Err(KirchhoffError::NonPositive { at: s, value: v });
        }
        Ok(v)
    };
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    struct Ctx<'a> {
        eval: &'a dyn Fn(f64) -> Result<f64, KirchhoffError>,
    }
    fn recurse(
        ctx: &Ctx,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, KirchhoffError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (ctx.eval)(lm)?;
        let frm = (ctx.eval)(rm)?;
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth >= 48 {
            return Err(KirchhoffError::Divergent);
        }
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        let lv = recurse(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let rv = recurse(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(lv + rv)
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = eval(lo)?;
    let fb = eval(hi)?;
    let fm = eval(0.5 * (lo + hi))?;
    let whole = simpson(fa, fm, fb, hi - lo);
    let ctx = Ctx { eval: &eval };
    let v = recurse(&ctx, lo, hi, fa, fm, fb, whole, tol, 0)?;
    if !v.is_finite() {
        return Err(KirchhoffError::Divergent);
    }
    Ok(sign * v)
}

fn power_exponent(d: &FunctionDescriptor) -> Option<f64> {
    match d.kind() {
        crate::expr::Kind::Power { exponent } => Some(*exponent),
        _ => None,
    }
}

/// `∫_{reference}^{upper} D(s) ds`, under the requested normalization.
///
/// With [`Normalization::PowerLaw`] and `D = s^k`, returns `upper^(k+1)`
/// exactly (reference is ignored; the convention pins it at 0).
pub fn kirchhoff_forward(
    d: &FunctionDescriptor,
    upper: f64,
    reference: f64,
    norm: Normalization,
) -> Result<f64, KirchhoffError> {
    check_arity(d, "diffusivity", 1)?;
    match norm {
        Normalization::PowerLaw => {
            let k = power_exponent(d).ok_or(KirchhoffError::LogarithmicExponent)?;
            if k == -1.0 {
                return Err(KirchhoffError::LogarithmicExponent);
            }
            Ok(crate::expr::fractional_pow(upper, k + 1.0)?)
        }
        Normalization::Raw => integrate_positive(d, reference, upper, 1e-12),
    }
}

/// Inverts the forward map on a bracket where it is strictly increasing.
pub fn kirchhoff_inverse(
    d: &FunctionDescriptor,
    value: f64,
    bracket: (f64, f64),
    reference: f64,
    norm: Normalization,
) -> Result<f64, KirchhoffError> {
    check_arity(d, "diffusivity", 1)?;
    if let Normalization::PowerLaw = norm {
        let k = power_exponent(d).ok_or(KirchhoffError::LogarithmicExponent)?;
        if k == -1.0 {
            return Err(KirchhoffError::LogarithmicExponent);
        }
        return Ok(crate::expr::fractional_pow(value, 1.0 / (k + 1.0))?);
    }
    let (mut lo, mut hi) = bracket;
    if lo >= hi {
        return Err(KirchhoffError::NotIncreasing);
    }
    let forward = |s: f64| kirchhoff_forward(d, s, reference, norm);
    let flo = forward(lo)?;
    let fhi = forward(hi)?;
    if fhi <= flo {
        return Err(KirchhoffError::NotIncreasing);
    }
    if value < flo || value > fhi {
        return Err(KirchhoffError::OutOfRange { value, lo: flo, hi: fhi });
    }
    // Bisection with a Newton step where it stays inside the bracket;
    // derivative of the forward map is D itself.
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fm = forward(mid)? - value;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        let slope = d.eval1(mid)?;
        let newton = mid - fm / slope;
        mid = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let scale = mid.abs().max(1.0);
        if (hi - lo) <= 1e-15 * scale {
            break;
        }
    }
    Ok(mid)
}

/// Forward and inverse maps for one component, plus the kinetics factor the
/// convention introduces.
#[derive(Debug, Clone)]
pub struct ComponentMap {
    pub forward: FunctionDescriptor,
    pub inverse: FunctionDescriptor,
    /// Kinetics pick up a factor `-scale` under the substitution.
    pub scale: f64,
    /// Source exponent when the exact power route applied.
    power: Option<f64>,
}

/// Tabulation parameters used by [`transform_system`] for non-power
/// diffusivities.
#[derive(Debug, Clone, Copy)]
pub struct MapRange {
    /// Range of the source dependent variable covered by the tabulated map.
    pub range: (f64, f64),
    /// Reference point fixing the integration constant (clamped into range).
    pub reference: f64,
    /// Number of table nodes.
    pub nodes: usize,
}

impl Default for MapRange {
    fn default() -> Self {
        Self { range: (1e-3, 10.0), reference: 1e-3, nodes: 4097 }
    }
}

/// Builds the maps for a single diffusivity. Power tags take the exact
/// route; everything else is tabulated on `opts.range`.
pub fn build_map(
    d: &FunctionDescriptor,
    opts: &MapRange,
) -> Result<ComponentMap, KirchhoffError> {
    check_arity(d, "diffusivity", 1)?;
    if let Some(k) = power_exponent(d) {
        if k != -1.0 {
            return Ok(ComponentMap {
                forward: FunctionDescriptor::power(k + 1.0, "s"),
                inverse: FunctionDescriptor::power(1.0 / (k + 1.0), "s"),
                scale: k + 1.0,
                power: Some(k),
            });
        }
        // k = -1 integrates to a logarithm; fall through to the table.
    }
    let (lo, hi) = opts.range;
    if !(lo < hi) || opts.nodes < 8 {
        return Err(KirchhoffError::NotIncreasing);
    }
    let n = opts.nodes;
    let h = (hi - lo) / (n - 1) as f64;
    let reference = opts.reference.clamp(lo, hi);

    // Cumulative Simpson pass for K(s) = ∫ d, with value/derivative rows so
    // the grid interpolation is Hermite on both K and its slope.
    let mut slopes = Vec::with_capacity(n);
    let mut curvatures = Vec::with_capacity(n);
    for i in 0..n {
        let s = lo + h * i as f64;
        let v = d.eval1(s)?;
        if v <= 0.0 {
            return Err(KirchhoffError::NonPositive { at: s, value: v });
        }
        slopes.push(v);
        curvatures.push(d.deriv1(s, 1)?);
    }
    let mut values = vec![0.0; n];
    for i in 1..n {
        let a = lo + h * (i - 1) as f64;
        let m = a + 0.5 * h;
        let fm = d.eval1(m)?;
        if fm <= 0.0 {
            return Err(KirchhoffError::NonPositive { at: m, value: fm });
        }
        values[i] = values[i - 1] + h / 6.0 * (slopes[i - 1] + 4.0 * fm + slopes[i]);
    }
    let offset = {
        let grid = GridInterp::new(lo, h, vec![values.clone(), slopes.clone()]);
        grid.eval(reference, 0)?
    };
    // Anchor the map so it fixes the reference point: u = a + ∫_a^U D.
    // Applying the construction twice then cancels exactly, which is what
    // makes the system round trip an involution on the tabulated route too.
    for v in &mut values {
        *v += reference - offset;
    }
    let forward_grid =
        GridInterp::new(lo, h, vec![values.clone(), slopes.clone(), curvatures.clone()]);

    // Inverse table on a uniform grid in the image variable.
    let (img_lo, img_hi) = (values[0], values[n - 1]);
    let hu = (img_hi - img_lo) / (n - 1) as f64;
    if !(hu > 0.0) {
        return Err(KirchhoffError::NotIncreasing);
    }
    let mut inv_values = Vec::with_capacity(n);
    let mut inv_slopes = Vec::with_capacity(n);
    let mut inv_curvs = Vec::with_capacity(n);
    for i in 0..n {
        let target = img_lo + hu * i as f64;
        let mut a = lo;
        let mut b = hi;
        let mut mid = 0.5 * (a + b);
        for _ in 0..80 {
            let fv = forward_grid.eval(mid, 0)? - target;
            if fv > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
            let slope = forward_grid.eval(mid, 1)?;
            let newton = mid - fv / slope;
            mid = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (b - a) <= 1e-15 * mid.abs().max(1.0) {
                break;
            }
        }
        let dv = d.eval1(mid)?;
        inv_values.push(mid);
        inv_slopes.push(1.0 / dv);
        inv_curvs.push(-d.deriv1(mid, 1)? / (dv * dv * dv));
    }
    let inverse_grid = GridInterp::new(img_lo, hu, vec![inv_values, inv_slopes, inv_curvs]);

    Ok(ComponentMap {
        forward: FunctionDescriptor::from_grid(forward_grid, "s"),
        inverse: FunctionDescriptor::from_grid(inverse_grid, "s"),
        scale: 1.0,
        power: None,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TransformOptions {
    pub map_u: MapRange,
    pub map_v: MapRange,
}

/// Converts a system to the other form. The output's coefficients evaluate
/// through the component maps; for power-law diffusivities the exponent
/// identities are exact, otherwise accuracy follows the tabulation.
pub fn transform_system(
    sys: &RDSystem,
    opts: &TransformOptions,
) -> Result<RDSystem, KirchhoffError> {
    let map_u = build_map(&sys.diff_u, &opts.map_u)?;
    let map_v = build_map(&sys.diff_v, &opts.map_v)?;

    // New diffusivity: reciprocal of the old one composed with the inverse
    // map; a power tag stays a power tag with the mapped exponent. New
    // kinetics: -scale * old kinetics composed with both inverses.
    let new_diff = |old: &FunctionDescriptor, map: &ComponentMap, var: &str| {
        if let Some(g) = map.power {
            return FunctionDescriptor::power(-g / (g + 1.0), var);
        }
        let inner = Field::apply1(&map.inverse, Field::coord(0));
        FunctionDescriptor::from_field(
            Field::konst(1.0) / Field::apply1(old, inner),
            &[var],
        )
    };
    let diff_u = new_diff(&sys.diff_u, &map_u, "u");
    let diff_v = new_diff(&sys.diff_v, &map_v, "v");

    let new_kin = |old: &FunctionDescriptor, scale: f64| {
        let arg_u = Field::apply1(&map_u.inverse, Field::coord(0));
        let arg_v = Field::apply1(&map_v.inverse, Field::coord(1));
        FunctionDescriptor::from_field(
            Field::konst(-scale) * Field::apply(old, vec![arg_u, arg_v]),
            &["u", "v"],
        )
    };
    let kin_u = new_kin(&sys.kin_u, map_u.scale);
    let kin_v = new_kin(&sys.kin_v, map_v.scale);

    let form = match sys.form {
        SystemForm::Divergence => SystemForm::Transformed,
        SystemForm::Transformed => SystemForm::Divergence,
    };
    Ok(RDSystem { form, diff_u, diff_v, kin_u, kin_v })
}

/// `k = -γ/(γ+1)`, the exponent map between the two forms (involutive).
pub fn power_exponent_map(gamma: f64) -> Result<f64, KirchhoffError> {
    if gamma == -1.0 {
        return Err(KirchhoffError::LogarithmicExponent);
    }
    Ok(-gamma / (gamma + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn power_forward_paper_convention() {
        let d = FunctionDescriptor::power(1.0, "U");
        // D = U^1, convention absorbs the 1/2: u = U^2
        close(
            kirchhoff_forward(&d, 3.0, 0.0, Normalization::PowerLaw).unwrap(),
            9.0,
            0.0,
        );
    }

    #[test]
    fn raw_vs_convention() {
        let d = FunctionDescriptor::power(1.0, "U");
        close(kirchhoff_forward(&d, 2.0, 0.0, Normalization::Raw).unwrap(), 2.0, 1e-12);
        close(kirchhoff_forward(&d, 2.0, 0.0, Normalization::PowerLaw).unwrap(), 4.0, 0.0);
    }

    #[test]
    fn identity_diffusivity() {
        let d = FunctionDescriptor::constant(1.0, &["U"]);
        close(kirchhoff_forward(&d, 5.0, 0.0, Normalization::Raw).unwrap(), 5.0, 1e-12);
        close(
            kirchhoff_inverse(&d, 5.0, (0.0, 10.0), 0.0, Normalization::Raw).unwrap(),
            5.0,
            1e-12,
        );
    }

    #[test]
    fn power_inverse() {
        let d = FunctionDescriptor::power(1.0, "U");
        close(
            kirchhoff_inverse(&d, 9.0, (0.0, 10.0), 0.0, Normalization::PowerLaw).unwrap(),
            3.0,
            0.0,
        );
    }

    #[test]
    fn exp_round_trip() {
        let d = FunctionDescriptor::exponential(1.0, "U");
        for i in 0..100 {
            let big_u = -2.0 + 4.0 * (i as f64) / 99.0;
            let u = kirchhoff_forward(&d, big_u, -2.0, Normalization::Raw).unwrap();
            let back =
                kirchhoff_inverse(&d, u, (-2.0, 2.0), -2.0, Normalization::Raw).unwrap();
            close(back, big_u, 1e-10 * big_u.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_rejects_outside_range() {
        let d = FunctionDescriptor::power(1.0, "U");
        assert!(matches!(
            kirchhoff_inverse(&d, 100.0, (0.0, 2.0), 0.0, Normalization::Raw),
            Err(KirchhoffError::OutOfRange { .. })
        ));
    }

    #[test]
    fn exponent_map_identity() {
        // γ = -1/2 pairs with k = 1, and the map is an involution.
        close(power_exponent_map(-0.5).unwrap(), 1.0, 0.0);
        for gamma in [-0.5, 0.25, 2.0, -0.8] {
            let k = power_exponent_map(gamma).unwrap();
            close(power_exponent_map(k).unwrap(), gamma, 1e-15);
        }
        assert!(power_exponent_map(-1.0).is_err());
    }

    #[test]
    fn transform_power_pair() {
        // d1 = u^(-1/2) in the transformed form pairs with D1 = U^1, and the
        // coefficient relation d1(u) = 1/D1(U) holds under u = U^2.
        let sys = RDSystem::transformed(
            FunctionDescriptor::power(-0.5, "u"),
            FunctionDescriptor::power(1.0, "v"),
            FunctionDescriptor::constant(0.0, &["u", "v"]),
            FunctionDescriptor::constant(0.0, &["u", "v"]),
        )
        .unwrap();
        let out = transform_system(&sys, &TransformOptions::default()).unwrap();
        assert_eq!(out.form, SystemForm::Divergence);
        for i in 1..10 {
            let big_u = 0.3 * i as f64;
            let u = big_u * big_u;
            let d1_at_u = sys.diff_u.eval1(u).unwrap();
            let cap_d1_at_cap_u = out.diff_u.eval1(big_u).unwrap();
            close(d1_at_u, 1.0 / cap_d1_at_cap_u, 1e-12);
        }
    }

    #[test]
    fn transform_identity_system() {
        let one = FunctionDescriptor::constant(1.0, &["U"]);
        let zero = FunctionDescriptor::constant(0.0, &["U", "V"]);
        let sys = RDSystem::divergence(one.clone(), one, zero.clone(), zero).unwrap();
        let out = transform_system(&sys, &TransformOptions::default()).unwrap();
        for i in 1..8 {
            let s = 0.5 + i as f64;
            close(out.diff_u.eval1(s).unwrap(), 1.0, 1e-10);
            close(out.kin_u.eval(&[s, s]).unwrap(), 0.0, 1e-12);
        }
    }

    #[test]
    fn transform_round_trip_evaluations() {
        let sys = RDSystem::transformed(
            FunctionDescriptor::power(-0.5, "u"),
            FunctionDescriptor::power(2.0, "v"),
            parse_expr("u + 0.5*v", &["u", "v"]).unwrap(),
            parse_expr("u*v", &["u", "v"]).unwrap(),
        )
        .unwrap();
        let double = transform_system(
            &transform_system(&sys, &TransformOptions::default()).unwrap(),
            &TransformOptions::default(),
        )
        .unwrap();
        assert_eq!(double.form, SystemForm::Transformed);
        for i in 1..10 {
            let u = 0.2 * i as f64 + 0.1;
            let v = 0.15 * i as f64 + 0.2;
            close(
                double.diff_u.eval1(u).unwrap(),
                sys.diff_u.eval1(u).unwrap(),
                1e-10,
            );
            close(
                double.kin_u.eval(&[u, v]).unwrap(),
                sys.kin_u.eval(&[u, v]).unwrap(),
                1e-10,
            );
            close(
                double.kin_v.eval(&[u, v]).unwrap(),
                sys.kin_v.eval(&[u, v]).unwrap(),
                1e-10,
            );
        }
    }

    #[test]
    fn tabulated_route_matches_quadrature() {
        let d = parse_expr("exp(0.5*s)", &["s"]).unwrap();
        let map = build_map(
            &d,
            &MapRange { range: (0.0, 4.0), reference: 0.0, nodes: 2049 },
        )
        .unwrap();
        for i in 0..20 {
            let s = 0.1 + 0.19 * i as f64;
            let via_table = map.forward.eval1(s).unwrap();
            let via_quad = kirchhoff_forward(&d, s, 0.0, Normalization::Raw).unwrap();
            close(via_table, via_quad, 1e-11);
            close(map.inverse.eval1(via_table).unwrap(), s, 1e-10);
        }
    }
}
