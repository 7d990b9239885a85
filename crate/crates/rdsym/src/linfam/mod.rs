//! Closed-form solution families of the linear reduced profile system
//!
//! ```text
//! φ'' = a11 φ + a12 ψ
//! ψ'' = a21 φ + a22 ψ.
//! ```
//!
//! Eliminating ψ through the first equation leaves the 4th-order ODE
//! `φ'''' - s φ'' + det φ = 0` with `s = a11 + a22` and
//! `det = a11 a22 - a12 a21`, whose characteristic quartic
//! `z^4 - s z^2 + det = 0` has nine qualitatively different root layouts.
//! [`classify`] picks the branch; [`LinearFamily`] evaluates the general
//! solution of that branch for given constants `C1..C4`. ψ is always
//! reconstructed as `(φ'' - a11 φ)/a12`, which satisfies the full system by
//! construction for any φ solving the quartic ODE — the printed per-branch ψ
//! formulas are only cross-checked in tests.
//!
//! [`power`] carries the power-diffusivity application built on branch 2,
//! including its zero-flux boundary-value checks.

pub mod power;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Field, FunctionDescriptor};
use crate::kirchhoff::RDSystem;

#[derive(Debug, Clone, Error)]
pub enum FamilyError {
    #[error("both off-diagonal entries vanish: the system decouples and is outside the family")]
    Decoupled,
    #[error("internal classification inconsistency: {0}")]
    Inconsistent(String),
    #[error("the separable lift needs alpha != 0")]
    ZeroAlpha,
    #[error("{name} = {value} is outside the admissible range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("constraint {name} violated (defect {value:.3e})")]
    Constraint { name: &'static str, value: f64 },
    #[error("the zero-flux construction needs C2 = 0 (got {0})")]
    NeedsZeroC2(f64),
    #[error("negative base {base} under fractional power")]
    NegativeBase { base: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    System(#[from] crate::kirchhoff::KirchhoffError),
}

/// Root layout of the characteristic quartic, with the branch frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Branch {
    /// det = 0, s = 0: quadruple zero root, cubic-polynomial profiles.
    Polynomial,
    /// det = 0, s < 0: double zero plus `±i h`.
    TrigPlusLinear { h: f64 },
    /// det = 0, s > 0: double zero plus `±h`.
    ExpPlusLinear { h: f64 },
    /// Δ = 0, s > 0: double real pair `±h`.
    ExpRepeated { h: f64 },
    /// Δ = 0, s < 0: double imaginary pair `±i h`.
    TrigRepeated { h: f64 },
    /// Δ > 0, s > √Δ: four distinct real roots `±h_minus`, `±h_plus`.
    ExpPair { h_minus: f64, h_plus: f64 },
    /// Δ > 0, s² < Δ: real pair `±h2` and imaginary pair `±i h1`.
    TrigExp { h1: f64, h2: f64 },
    /// Δ > 0, s < -√Δ: two imaginary pairs `±i h_minus`, `±i h_plus`.
    TrigPair { h_minus: f64, h_plus: f64 },
    /// Δ < 0: complex quadruple `±h1 ± i h2`.
    Spiral { h1: f64, h2: f64, delta: f64 },
}

impl Branch {
    pub fn case_id(&self) -> u8 {
        match self {
            Branch::Polynomial => 1,
            Branch::TrigPlusLinear { .. } => 2,
            Branch::ExpPlusLinear { .. } => 3,
            Branch::ExpRepeated { .. } => 4,
            Branch::TrigRepeated { .. } => 5,
            Branch::ExpPair { .. } => 6,
            Branch::TrigExp { .. } => 7,
            Branch::TrigPair { .. } => 8,
            Branch::Spiral { .. } => 9,
        }
    }
}

/// Scale-aware default classification tolerance.
pub fn default_tol(lambda: &[[f64; 2]; 2]) -> f64 {
    let norm = lambda
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    1e-9 * (1.0 + norm)
}

/// Invariants of the coefficient matrix.
pub fn invariants(lambda: &[[f64; 2]; 2]) -> (f64, f64, f64) {
    let s = lambda[0][0] + lambda[1][1];
    let det = lambda[0][0] * lambda[1][1] - lambda[0][1] * lambda[1][0];
    let disc = (lambda[0][0] - lambda[1][1]).powi(2) + 4.0 * lambda[0][1] * lambda[1][0];
    (s, det, disc)
}

/// Selects the solution branch. Boundary cases (det or Δ within `tol`)
/// resolve to the degenerate branch, whose formulas are the limits of the
/// generic ones.
pub fn classify(lambda: &[[f64; 2]; 2], tol: f64) -> Result<Branch, FamilyError> {
    if lambda[0][1] == 0.0 && lambda[1][0] == 0.0 {
        return Err(FamilyError::Decoupled);
    }
    let (s, det, disc) = invariants(lambda);
    if det.abs() <= tol {
        return Ok(if s.abs() <= tol {
            Branch::Polynomial
        } else if s < 0.0 {
            Branch::TrigPlusLinear { h: (-s).sqrt() }
        } else {
            Branch::ExpPlusLinear { h: s.sqrt() }
        });
    }
    if disc.abs() <= tol {
        // 4 det = s^2 - Δ, so det != 0 forces s != 0 here
        if s > tol {
            return Ok(Branch::ExpRepeated { h: (0.5 * s).sqrt() });
        }
        if s < -tol {
            return Ok(Branch::TrigRepeated { h: (-0.5 * s).sqrt() });
        }
        return Err(FamilyError::Inconsistent(
            "disc ~ 0 and s ~ 0 but det != 0".into(),
        ));
    }
    if disc > 0.0 {
        let root = disc.sqrt();
        if s > root {
            return Ok(Branch::ExpPair {
                h_minus: (0.5 * (s - root)).sqrt(),
                h_plus: (0.5 * (s + root)).sqrt(),
            });
        }
        if s < -root {
            return Ok(Branch::TrigPair {
                h_minus: (0.5 * (root - s)).sqrt(),
                h_plus: (0.5 * (-root - s)).sqrt(),
            });
        }
        if s * s < disc {
            return Ok(Branch::TrigExp {
                h1: (0.5 * (root - s)).sqrt(),
                h2: (0.5 * (s + root)).sqrt(),
            });
        }
        // |s| = √Δ would force det = 0, contradicting the branch above
        return Err(FamilyError::Inconsistent(format!(
            "s = ±√Δ with det = {det} beyond tolerance"
        )));
    }
    let delta = 2.0 * det.sqrt();
    Ok(Branch::Spiral {
        h1: 0.5 * (delta + s).sqrt(),
        h2: 0.5 * (delta - s).sqrt(),
        delta,
    })
}

#[derive(Debug, Clone, Copy)]
enum Part {
    Re,
    Im,
}

/// One fundamental mode `part(x^degree e^{z x})`.
#[derive(Debug, Clone, Copy)]
struct Mode {
    z: Complex64,
    degree: usize,
    part: Part,
}

impl Mode {
    fn real(z: f64, degree: usize) -> Self {
        Self { z: Complex64::new(z, 0.0), degree, part: Part::Re }
    }

    /// n-th derivative at x: repeatedly apply p -> p' + z p on the
    /// polynomial factor, then evaluate.
    fn deriv(&self, x: f64, n: usize) -> f64 {
        let mut poly = vec![Complex64::new(0.0, 0.0); self.degree + 1];
        poly[self.degree] = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len()];
            for j in 0..poly.len() {
                if j + 1 < poly.len() {
                    next[j] += (j as f64 + 1.0) * poly[j + 1];
                }
                next[j] += self.z * poly[j];
            }
            poly = next;
        }
        let mut val = Complex64::new(0.0, 0.0);
        for j in (0..poly.len()).rev() {
            val = val * x + poly[j];
        }
        let full = val * (self.z * x).exp();
        match self.part {
            Part::Re => full.re,
            Part::Im => full.im,
        }
    }
}

fn modes_for(branch: &Branch) -> [Mode; 4] {
    let i = |h: f64| Complex64::new(0.0, h);
    match *branch {
        Branch::Polynomial => [
            Mode::real(0.0, 0),
            Mode::real(0.0, 1),
            Mode::real(0.0, 2),
            Mode::real(0.0, 3),
        ],
        Branch::TrigPlusLinear { h } => [
            Mode { z: i(h), degree: 0, part: Part::Re },
            Mode { z: i(h), degree: 0, part: Part::Im },
            Mode::real(0.0, 1),
            Mode::real(0.0, 0),
        ],
        Branch::ExpPlusLinear { h } => [
            Mode::real(h, 0),
            Mode::real(-h, 0),
            Mode::real(0.0, 1),
            Mode::real(0.0, 0),
        ],
        Branch::ExpRepeated { h } => [
            Mode::real(h, 0),
            Mode::real(h, 1),
            Mode::real(-h, 0),
            Mode::real(-h, 1),
        ],
        Branch::TrigRepeated { h } => [
            Mode { z: i(h), degree: 0, part: Part::Re },
            Mode { z: i(h), degree: 1, part: Part::Re },
            Mode { z: i(h), degree: 0, part: Part::Im },
            Mode { z: i(h), degree: 1, part: Part::Im },
        ],
        Branch::ExpPair { h_minus, h_plus } => [
            Mode::real(h_minus, 0),
            Mode::real(-h_minus, 0),
            Mode::real(h_plus, 0),
            Mode::real(-h_plus, 0),
        ],
        Branch::TrigExp { h1, h2 } => [
            Mode { z: i(h1), degree: 0, part: Part::Re },
            Mode { z: i(h1), degree: 0, part: Part::Im },
            Mode::real(h2, 0),
            Mode::real(-h2, 0),
        ],
        Branch::TrigPair { h_minus, h_plus } => [
            Mode { z: i(h_minus), degree: 0, part: Part::Re },
            Mode { z: i(h_minus), degree: 0, part: Part::Im },
            Mode { z: i(h_plus), degree: 0, part: Part::Re },
            Mode { z: i(h_plus), degree: 0, part: Part::Im },
        ],
        Branch::Spiral { h1, h2, .. } => [
            Mode { z: Complex64::new(h1, h2), degree: 0, part: Part::Re },
            Mode { z: Complex64::new(h1, h2), degree: 0, part: Part::Im },
            Mode { z: Complex64::new(-h1, h2), degree: 0, part: Part::Re },
            Mode { z: Complex64::new(-h1, h2), degree: 0, part: Part::Im },
        ],
    }
}

/// Profile values and derivatives at one x.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

/// A classified coefficient matrix with constants, evaluating (φ, ψ).
#[derive(Debug, Clone)]
pub struct LinearFamily {
    lambda: [[f64; 2]; 2],
    constants: [f64; 4],
    branch: Branch,
    /// Matrix actually used for construction; equals `lambda` unless the
    /// roles of the two equations had to be exchanged (a12 = 0, a21 != 0).
    work: [[f64; 2]; 2],
    swapped: bool,
    modes: [Mode; 4],
}

impl LinearFamily {
    pub fn new(lambda: [[f64; 2]; 2], constants: [f64; 4]) -> Result<Self, FamilyError> {
        Self::with_tol(lambda, constants, default_tol(&lambda))
    }

    pub fn with_tol(
        lambda: [[f64; 2]; 2],
        constants: [f64; 4],
        tol: f64,
    ) -> Result<Self, FamilyError> {
        let branch = classify(&lambda, tol)?;
        let (work, swapped) = if lambda[0][1] != 0.0 {
            (lambda, false)
        } else {
            // start from the second equation: exchange both the equation
            // order and the component order (invariants are unchanged)
            (
                [[lambda[1][1], lambda[1][0]], [lambda[0][1], lambda[0][0]]],
                true,
            )
        };
        let modes = modes_for(&branch);
        Ok(Self { lambda, constants, branch, work, swapped, modes })
    }

    pub fn branch(&self) -> &Branch {
        &self.branch
    }

    pub fn case_id(&self) -> u8 {
        self.branch.case_id()
    }

    pub fn lambda(&self) -> &[[f64; 2]; 2] {
        &self.lambda
    }

    pub fn constants(&self) -> &[f64; 4] {
        &self.constants
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    fn base_deriv(&self, x: f64, n: usize) -> f64 {
        self.constants
            .iter()
            .zip(&self.modes)
            .map(|(c, m)| c * m.deriv(x, n))
            .sum()
    }

    /// Values and first two derivatives of both profiles at x.
    pub fn eval_full(&self, x: f64) -> ProfilePoint {
        // a is the component built from the modes; b follows from the first
        // work equation, b = (a'' - w11 a)/w12. For any quartic-ODE solution
        // a, the pair (a, b) solves the full work system.
        let w11 = self.work[0][0];
        let w12 = self.work[0][1];
        let a: Vec<f64> = (0..=4).map(|n| self.base_deriv(x, n)).collect();
        let b: Vec<f64> = (0..=2).map(|n| (a[n + 2] - w11 * a[n]) / w12).collect();
        if self.swapped {
            ProfilePoint {
                phi: b[0],
                dphi: b[1],
                ddphi: b[2],
                psi: a[0],
                dpsi: a[1],
                ddpsi: a[2],
            }
        } else {
            ProfilePoint {
                phi: a[0],
                dphi: a[1],
                ddphi: a[2],
                psi: b[0],
                dpsi: b[1],
                ddpsi: b[2],
            }
        }
    }

    /// `(φ, ψ)` at x.
    pub fn eval_profile(&self, x: f64) -> (f64, f64) {
        let p = self.eval_full(x);
        (p.phi, p.psi)
    }

    /// Residuals of both system equations at x (analytic derivatives).
    pub fn system_residual(&self, x: f64) -> (f64, f64) {
        let p = self.eval_full(x);
        let l = &self.lambda;
        (
            p.ddphi - l[0][0] * p.phi - l[0][1] * p.psi,
            p.ddpsi - l[1][0] * p.phi - l[1][1] * p.psi,
        )
    }
}

/// The separable solutions `u = φ(x) e^(t/alpha)`, `v = ψ(x) e^(t/alpha)`.
/// They satisfy the transformed system with kinetics
/// `C1 = a11 u + a12 v - u d1(u)/alpha`, `C2 = a21 u + a22 v - v^(alpha+1)/alpha`
/// for any diffusivity `d1` (the d1 terms cancel against the time
/// derivative).
#[derive(Debug, Clone)]
pub struct LiftedFamily {
    pub family: LinearFamily,
    pub alpha: f64,
}

impl LiftedFamily {
    pub fn new(family: LinearFamily, alpha: f64) -> Result<Self, FamilyError> {
        if alpha == 0.0 {
            return Err(FamilyError::ZeroAlpha);
        }
        Ok(Self { family, alpha })
    }

    pub fn eval(&self, t: f64, x: f64) -> (f64, f64) {
        let (phi, psi) = self.family.eval_profile(x);
        let factor = (t / self.alpha).exp();
        (phi * factor, psi * factor)
    }

    /// The transformed-form system that the lift solves, for the chosen
    /// diffusivity `d1`.
    pub fn system_with_diffusivity(
        &self,
        d1: &FunctionDescriptor,
    ) -> Result<RDSystem, FamilyError> {
        let l = self.family.lambda();
        let a = self.alpha;
        let u = Field::coord(0);
        let v = Field::coord(1);
        let c1 = Field::konst(l[0][0]) * u.clone() + Field::konst(l[0][1]) * v.clone()
            - Field::konst(1.0 / a) * u.clone() * Field::apply1(d1, u.clone());
        let c2 = Field::konst(l[1][0]) * u + Field::konst(l[1][1]) * v.clone()
            - Field::konst(1.0 / a) * v.powc(a + 1.0);
        Ok(RDSystem::transformed(
            d1.clone(),
            FunctionDescriptor::power(a, "v"),
            FunctionDescriptor::from_field(c1, &["u", "v"]),
            FunctionDescriptor::from_field(c2, &["u", "v"]),
        )?)
    }
}

/// Roots of `z^4 - s z^2 + det = 0` by Durand-Kerner iteration. Used as an
/// independent cross-check of [`classify`]; it shares no logic with it.
pub fn characteristic_roots(lambda: &[[f64; 2]; 2]) -> [Complex64; 4] {
    let (s, det, _) = invariants(lambda);
    let p = |z: Complex64| z * z * z * z - s * z * z + det;
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
    for _ in 0..400 {
        let mut next = roots;
        let mut moved = 0.0_f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = p(roots[i]) / denom;
            next[i] = roots[i] - step;
            moved = moved.max(step.norm());
        }
        roots = next;
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

/// Crude root taxonomy: counts of (≈0, real, imaginary, fully complex).
pub fn root_structure(roots: &[Complex64; 4], tol: f64) -> (usize, usize, usize, usize) {
    let mut zeros = 0;
    let mut real = 0;
    let mut imag = 0;
    let mut complex = 0;
    for z in roots {
        let re = z.re.abs() > tol;
        let im = z.im.abs() > tol;
        match (re, im) {
            (false, false) => zeros += 1,
            (true, false) => real += 1,
            (false, true) => imag += 1,
            (true, true) => complex += 1,
        }
    }
    (zeros, real, imag, complex)
}

/// The class counts each branch predicts.
pub fn expected_structure(branch: &Branch) -> (usize, usize, usize, usize) {
    match branch {
        Branch::Polynomial => (4, 0, 0, 0),
        Branch::TrigPlusLinear { .. } => (2, 0, 2, 0),
        Branch::ExpPlusLinear { .. } => (2, 2, 0, 0),
        Branch::ExpRepeated { .. } | Branch::ExpPair { .. } => (0, 4, 0, 0),
        Branch::TrigRepeated { .. } | Branch::TrigPair { .. } => (0, 0, 4, 0),
        Branch::TrigExp { .. } => (0, 2, 2, 0),
        Branch::Spiral { .. } => (0, 0, 0, 4),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn classify_flagship_matrix() {
        // det = 0, s = -6: trig-plus-linear branch with h = sqrt(6)
        let branch = classify(&[[-4.0, 2.0], [4.0, -2.0]], 1e-9).unwrap();
        match branch {
            Branch::TrigPlusLinear { h } => close(h, 6f64.sqrt(), 1e-15),
            other => panic!("wrong branch {other:?}"),
        }
    }

    #[test]
    fn classify_nilpotent_matrix() {
        let branch = classify(&[[0.0, 1.0], [0.0, 0.0]], 1e-9).unwrap();
        assert_eq!(branch.case_id(), 1);
    }

    #[test]
    fn classify_distinct_real_roots() {
        // Δ = 4, s = 4 > 2: four real roots ±1, ±√3
        let branch = classify(&[[3.0, 1.0], [0.0, 1.0]], 1e-9).unwrap();
        match branch {
            Branch::ExpPair { h_minus, h_plus } => {
                close(h_minus, 1.0, 1e-12);
                close(h_plus, 3f64.sqrt(), 1e-12);
            }
            other => panic!("wrong branch {other:?}"),
        }
    }

    #[test]
    fn decoupled_rejected() {
        assert!(matches!(
            classify(&[[1.0, 0.0], [0.0, 2.0]], 1e-9),
            Err(FamilyError::Decoupled)
        ));
    }

    #[test]
    fn flagship_profile_values() {
        // C = (0.2, 0, 0, 0.25): φ(0) = 0.45 and ψ(0) = 0.3 via the
        // first-equation construction (-6*0.2 + 4*0.45)/2.
        let fam = LinearFamily::new([[-4.0, 2.0], [4.0, -2.0]], [0.2, 0.0, 0.0, 0.25])
            .unwrap();
        let (phi, psi) = fam.eval_profile(0.0);
        close(phi, 0.45, 1e-15);
        close(psi, 0.3, 1e-14);
    }

    #[test]
    fn constant_null_mode() {
        // a11 = 0 with C = (1, 0, 0, 0) in the polynomial branch: φ ≡ 1, ψ ≡ 0
        let fam = LinearFamily::new([[0.0, 1.0], [0.0, 0.0]], [1.0, 0.0, 0.0, 0.0]).unwrap();
        for x in [0.0, 0.7, -1.3] {
            let (phi, psi) = fam.eval_profile(x);
            close(phi, 1.0, 1e-15);
            close(psi, 0.0, 1e-15);
        }
    }

    #[test]
    fn exp_pair_profile_satisfies_system() {
        let fam = LinearFamily::new([[3.0, 1.0], [0.0, 1.0]], [0.3, -0.2, 0.5, 0.1]).unwrap();
        assert_eq!(fam.case_id(), 6);
        for i in 0..30 {
            let x = -1.0 + i as f64 * 0.07;
            let (r1, r2) = fam.system_residual(x);
            assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "{r1} {r2}");
        }
    }

    #[test]
    fn all_branch_profiles_satisfy_system() {
        // one representative matrix per branch
        let cases: Vec<[[f64; 2]; 2]> = vec![
            [[0.0, 1.0], [0.0, 0.0]],    // 1
            [[-4.0, 2.0], [4.0, -2.0]],  // 2
            [[4.0, 2.0], [4.0, 2.0]],    // 3: det = 0, s = 6
            [[2.0, 1.0], [0.0, 2.0]],    // 4: Δ = 0, s = 4
            [[-2.0, 1.0], [0.0, -2.0]],  // 5: Δ = 0, s = -4
            [[3.0, 1.0], [0.0, 1.0]],    // 6
            [[2.0, 3.0], [3.0, -2.0]],   // 7: Δ = 52 > s² = 0
            [[-3.0, 1.0], [0.0, -1.0]],  // 8: Δ = 4, s = -4 < -2
            [[1.0, -2.0], [2.0, 1.0]],   // 9: Δ = -16
        ];
        for (i, lambda) in cases.iter().enumerate() {
            let fam = LinearFamily::new(*lambda, [0.4, -0.3, 0.2, 0.7]).unwrap();
            assert_eq!(fam.case_id() as usize, i + 1, "matrix {lambda:?}");
            for j in 0..25 {
                let x = -1.2 + j as f64 * 0.1;
                let (r1, r2) = fam.system_residual(x);
                assert!(
                    r1.abs() < 1e-9 && r2.abs() < 1e-9,
                    "branch {} at x = {x}: {r1} {r2}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn swapped_construction_when_a12_vanishes() {
        let fam = LinearFamily::new([[1.0, 0.0], [2.0, 3.0]], [0.5, 0.1, -0.2, 0.3]).unwrap();
        assert!(fam.swapped());
        for j in 0..20 {
            let x = -0.9 + j as f64 * 0.1;
            let (r1, r2) = fam.system_residual(x);
            assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "{r1} {r2}");
        }
    }

    #[test]
    fn roots_match_classification_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut done = 0;
        while done < 1000 {
            let mut lambda = [[0.0; 2]; 2];
            for row in &mut lambda {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-3.0..3.0);
                }
            }
            let (_, det, _) = invariants(&lambda);
            if det.abs() <= 0.01 {
                continue;
            }
            let branch = classify(&lambda, default_tol(&lambda)).unwrap();
            let roots = characteristic_roots(&lambda);
            let got = root_structure(&roots, 1e-6);
            assert_eq!(
                got,
                expected_structure(&branch),
                "lambda {lambda:?} branch {branch:?} roots {roots:?}"
            );
            done += 1;
        }
    }

    #[test]
    fn quartic_roots_are_roots() {
        let lambda = [[1.3, -0.7], [2.1, 0.4]];
        let (s, det, _) = invariants(&lambda);
        for z in characteristic_roots(&lambda) {
            let val = z * z * z * z - s * z * z + det;
            assert!(val.norm() < 1e-9, "{val}");
        }
    }

    /// The printed per-branch ψ formulas, transcribed for cross-checking.
    /// Branch 9's printed factor is corrupted in the source table; it is
    /// read as (a22 - a11) here and only logged on mismatch.
    fn printed_psi(fam: &LinearFamily, x: f64) -> Option<f64> {
        let l = fam.lambda();
        let (a11, a12, a22) = (l[0][0], l[0][1], l[1][1]);
        let c = fam.constants();
        let (_, det, disc) = invariants(l);
        let _ = det;
        match *fam.branch() {
            Branch::Polynomial => Some(
                -(a11 * c[0] - 2.0 * c[2] + (a11 * c[1] - 6.0 * c[3]) * x
                    + a11 * c[2] * x * x
                    + a11 * c[3] * x * x * x)
                    / a12,
            ),
            Branch::TrigPlusLinear { h } => Some(
                (a22 / a12) * (c[0] * (h * x).cos() + c[1] * (h * x).sin())
                    - (a11 / a12) * (c[2] * x + c[3]),
            ),
            Branch::ExpPlusLinear { h } => Some(
                (a22 / a12) * (c[0] * (h * x).exp() + c[1] * (-h * x).exp())
                    - (a11 / a12) * (c[2] * x + c[3]),
            ),
            Branch::ExpRepeated { h } => Some(
                ((h * x).exp() * ((a22 - a11) * (c[0] + c[1] * x) + 4.0 * h * c[1])
                    + (-h * x).exp() * ((a22 - a11) * (c[2] + c[3] * x) - 4.0 * h * c[3]))
                    / (2.0 * a12),
            ),
            Branch::TrigRepeated { h } => Some(
                ((h * x).cos() * ((a22 - a11) * (c[0] + c[1] * x) + 4.0 * h * c[3])
                    + (h * x).sin() * ((a22 - a11) * (c[2] + c[3] * x) - 4.0 * h * c[1]))
                    / (2.0 * a12),
            ),
            Branch::ExpPair { h_minus, h_plus } => Some(
                ((a22 - a11 - disc.sqrt())
                    * (c[0] * (h_minus * x).exp() + c[1] * (-h_minus * x).exp())
                    + (a22 - a11 + disc.sqrt())
                        * (c[2] * (h_plus * x).exp() + c[3] * (-h_plus * x).exp()))
                    / (2.0 * a12),
            ),
            Branch::TrigExp { h1, h2 } => Some(
                ((a22 - a11 - disc.sqrt())
                    * (c[0] * (h1 * x).cos() + c[1] * (h1 * x).sin())
                    + (a22 - a11 + disc.sqrt())
                        * (c[2] * (h2 * x).exp() + c[3] * (-h2 * x).exp()))
                    / (2.0 * a12),
            ),
            Branch::TrigPair { h_minus, h_plus } => Some(
                ((a22 - a11 - disc.sqrt())
                    * (c[0] * (h_minus * x).cos() + c[1] * (h_minus * x).sin())
                    + (a22 - a11 + disc.sqrt())
                        * (c[2] * (h_plus * x).cos() + c[3] * (h_plus * x).sin()))
                    / (2.0 * a12),
            ),
            Branch::Spiral { h1, h2, .. } => {
                let b = (-disc).sqrt();
                let a = a22 - a11;
                Some(
                    ((h1 * x).exp()
                        * ((c[0] * a + b * c[1]) * (h2 * x).cos()
                            + (c[1] * a - b * c[0]) * (h2 * x).sin())
                        + (-h1 * x).exp()
                            * ((c[2] * a - b * c[3]) * (h2 * x).cos()
                                + (c[3] * a + b * c[2]) * (h2 * x).sin()))
                        / (2.0 * a12),
                )
            }
        }
    }

    #[test]
    fn constructed_psi_matches_printed_formulas() {
        let cases: Vec<[[f64; 2]; 2]> = vec![
            [[0.0, 1.0], [0.0, 0.0]],
            [[-4.0, 2.0], [4.0, -2.0]],
            [[4.0, 2.0], [4.0, 2.0]],
            [[2.0, 1.0], [0.0, 2.0]],
            [[-2.0, 1.0], [0.0, -2.0]],
            [[3.0, 1.0], [0.0, 1.0]],
            [[2.0, 3.0], [3.0, -2.0]],
            [[-3.0, 1.0], [0.0, -1.0]],
        ];
        for lambda in &cases {
            let fam =
                LinearFamily::new(*lambda, [0.37, -0.21, 0.55, 0.13]).unwrap();
            for j in 0..20 {
                let x = -0.8 + 0.09 * j as f64;
                let (_, psi) = fam.eval_profile(x);
                let printed = printed_psi(&fam, x).unwrap();
                assert!(
                    (psi - printed).abs() <= 1e-9 * (1.0 + psi.abs()),
                    "branch {}: constructed {psi} vs printed {printed} at {x}",
                    fam.case_id()
                );
            }
        }
    }

    #[test]
    fn spiral_psi_printed_form_logged() {
        // branch 9: the printed formula is typographically corrupted in the
        // source table; under the (a22 - a11) reading it agrees with the
        // construction, which remains authoritative either way.
        let fam = LinearFamily::new([[1.0, -2.0], [2.0, 1.0]], [0.4, -0.3, 0.2, 0.7]).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..20 {
            let x = -0.8 + 0.09 * j as f64;
            let (_, psi) = fam.eval_profile(x);
            let printed = printed_psi(&fam, x).unwrap();
            worst = worst.max((psi - printed).abs() / (1.0 + psi.abs()));
        }
        println!("spiral-branch printed-psi deviation (informational): {worst:.3e}");
    }

    #[test]
    fn identity_connecting_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut lambda = [[0.0; 2]; 2];
            for row in &mut lambda {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-4.0..4.0);
                }
            }
            let (s, det, disc) = invariants(&lambda);
            close(4.0 * det, s * s - disc, 1e-12 * (1.0 + s * s + disc.abs()));
        }
    }
}
