//! Closed-form solutions of the divergence-form system with power
//! diffusivities
//!
//! ```text
//! U_t = (U^k U_x)_x - (l+1)/(l(k+1)) U + ls11 U^(k+1) + ls12 V^(l+1)
//! V_t = (V^l V_x)_x - (1/l) V      + ls21 U^(k+1) + ls22 V^(l+1)
//! ```
//!
//! built from the trig branch of the linear family through the power
//! substitution `u = U^(k+1)`, `v = V^(l+1)`. With `C2 = 0` the solutions
//! satisfy zero-flux conditions on `[0, j π/h]` and, for admissible
//! constants, stay positive and decay monotonically to the origin.

use serde::Serialize;

use super::{FamilyError, LinearFamily};
use crate::expr::{fractional_pow, Field, FunctionDescriptor};
use crate::kirchhoff::RDSystem;

/// `base^expo` with fast paths for the common unit and square exponents.
#[inline]
pub fn pow_fast(base: f64, expo: f64) -> f64 {
    if expo == 1.0 {
        base
    } else if expo == 2.0 {
        base * base
    } else {
        base.powf(expo)
    }
}

/// A three-parameter solution family of the power-diffusivity system.
#[derive(Debug, Clone, Serialize)]
pub struct PowerApplication {
    pub k: f64,
    pub l: f64,
    pub lambda_star: [[f64; 2]; 2],
    pub c1: f64,
    pub c2: f64,
    pub c4: f64,
    h: f64,
    /// Decay rate of U: (l+1)/(l(k+1)).
    rate_u: f64,
    /// Decay rate of V: 1/l.
    rate_v: f64,
    /// ψ = psi_amp (C1 cos + C2 sin) + psi_off.
    psi_amp: f64,
    psi_off: f64,
}

impl PowerApplication {
    pub fn new(
        k: f64,
        l: f64,
        lambda_star: [[f64; 2]; 2],
        c1: f64,
        c2: f64,
        c4: f64,
    ) -> Result<Self, FamilyError> {
        if k == -1.0 {
            return Err(FamilyError::BadParameter { name: "k", value: k });
        }
        if l == -1.0 || l == 0.0 {
            return Err(FamilyError::BadParameter { name: "l", value: l });
        }
        if lambda_star[0][1] == 0.0 {
            return Err(FamilyError::BadParameter {
                name: "lambda_star[0][1]",
                value: 0.0,
            });
        }
        let defect = lambda_star[0][0] * lambda_star[1][1]
            - lambda_star[0][1] * lambda_star[1][0];
        let scale = lambda_star.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
        if defect.abs() > 1e-12 * scale * scale {
            return Err(FamilyError::Constraint {
                name: "ls11*ls22 - ls12*ls21 = 0",
                value: defect,
            });
        }
        let h2 = (k + 1.0) * lambda_star[0][0] + (l + 1.0) * lambda_star[1][1];
        if h2 <= 0.0 {
            return Err(FamilyError::Constraint {
                name: "(k+1)*ls11 + (l+1)*ls22 > 0",
                value: h2,
            });
        }
        Ok(Self {
            k,
            l,
            lambda_star,
            c1,
            c2,
            c4,
            h: h2.sqrt(),
            rate_u: (l + 1.0) / (l * (k + 1.0)),
            rate_v: 1.0 / l,
            psi_amp: (l + 1.0) * lambda_star[1][1] / ((k + 1.0) * lambda_star[0][1]),
            psi_off: -lambda_star[0][0] / lambda_star[0][1] * c4,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Base profile of the U component (before the fractional power).
    pub fn phi(&self, x: f64) -> f64 {
        self.c1 * (self.h * x).cos() + self.c2 * (self.h * x).sin() + self.c4
    }

    fn dphi(&self, x: f64) -> f64 {
        self.h * (-self.c1 * (self.h * x).sin() + self.c2 * (self.h * x).cos())
    }

    /// Base profile of the V component.
    pub fn psi(&self, x: f64) -> f64 {
        self.psi_amp * (self.c1 * (self.h * x).cos() + self.c2 * (self.h * x).sin())
            + self.psi_off
    }

    fn dpsi(&self, x: f64) -> f64 {
        self.psi_amp * self.h
            * (-self.c1 * (self.h * x).sin() + self.c2 * (self.h * x).cos())
    }

    /// `(U, V)` at (t, x). Fails when a profile base is negative under the
    /// fractional power.
    pub fn solution(&self, t: f64, x: f64) -> Result<(f64, f64), FamilyError> {
        let pu = self.phi(x);
        let pv = self.psi(x);
        let u = fractional_pow(pu, 1.0 / (self.k + 1.0))
            .map_err(|_| FamilyError::NegativeBase { base: pu })?;
        let v = fractional_pow(pv, 1.0 / (self.l + 1.0))
            .map_err(|_| FamilyError::NegativeBase { base: pv })?;
        Ok((u * (-self.rate_u * t).exp(), v * (-self.rate_v * t).exp()))
    }

    /// Spatial derivatives `(U_x, V_x)` at (t, x), analytic.
    pub fn solution_dx(&self, t: f64, x: f64) -> Result<(f64, f64), FamilyError> {
        let pu = self.phi(x);
        let pv = self.psi(x);
        let du = fractional_pow(pu, 1.0 / (self.k + 1.0) - 1.0)
            .map_err(|_| FamilyError::NegativeBase { base: pu })?
            / (self.k + 1.0)
            * self.dphi(x);
        let dv = fractional_pow(pv, 1.0 / (self.l + 1.0) - 1.0)
            .map_err(|_| FamilyError::NegativeBase { base: pv })?
            / (self.l + 1.0)
            * self.dpsi(x);
        Ok((du * (-self.rate_u * t).exp(), dv * (-self.rate_v * t).exp()))
    }

    /// The linear-family view of the same profiles: coefficient matrix
    /// `a1i = -(k+1) ls1i`, `a2i = -(l+1) ls2i` and constants (C1, C2, 0, C4).
    pub fn family(&self) -> Result<LinearFamily, FamilyError> {
        let ls = &self.lambda_star;
        let lambda = [
            [-(self.k + 1.0) * ls[0][0], -(self.k + 1.0) * ls[0][1]],
            [-(self.l + 1.0) * ls[1][0], -(self.l + 1.0) * ls[1][1]],
        ];
        LinearFamily::new(lambda, [self.c1, self.c2, 0.0, self.c4])
    }

    /// Both kinetic rates at a state; shares the power evaluations between
    /// the components (this is the solver's hot path).
    #[inline]
    pub fn kinetic_rates(&self, u: f64, v: f64) -> (f64, f64) {
        let up = pow_fast(u, self.k + 1.0);
        let vp = pow_fast(v, self.l + 1.0);
        let ls = &self.lambda_star;
        (
            -self.rate_u * u + ls[0][0] * up + ls[0][1] * vp,
            -self.rate_v * v + ls[1][0] * up + ls[1][1] * vp,
        )
    }

    /// The divergence-form system the solutions satisfy, as descriptors.
    pub fn divergence_system(&self) -> Result<RDSystem, FamilyError> {
        let u = Field::coord(0);
        let v = Field::coord(1);
        let ls = &self.lambda_star;
        let up = u.clone().powc(self.k + 1.0);
        let vp = v.clone().powc(self.l + 1.0);
        let kin_u = Field::konst(-self.rate_u) * u + Field::konst(ls[0][0]) * up.clone()
            + Field::konst(ls[0][1]) * vp.clone();
        let kin_v = Field::konst(-self.rate_v) * v + Field::konst(ls[1][0]) * up
            + Field::konst(ls[1][1]) * vp;
        Ok(RDSystem::divergence(
            FunctionDescriptor::power(self.k, "U"),
            FunctionDescriptor::power(self.l, "V"),
            FunctionDescriptor::from_field(kin_u, &["U", "V"]),
            FunctionDescriptor::from_field(kin_v, &["U", "V"]),
        )?)
    }

    /// Zero-flux boundary-value checks on `[0, j π/h]`.
    pub fn check_bvp(&self, j: u32, horizon: f64, nx: usize) -> Result<BvpReport, FamilyError> {
        if self.c2 != 0.0 {
            return Err(FamilyError::NeedsZeroC2(self.c2));
        }
        if j == 0 {
            return Err(FamilyError::BadParameter { name: "j", value: 0.0 });
        }
        let length = j as f64 * std::f64::consts::PI / self.h;
        let nx = nx.max(64);

        let mut min_phi = f64::INFINITY;
        let mut min_psi = f64::INFINITY;
        for i in 0..=nx {
            let x = length * i as f64 / nx as f64;
            min_phi = min_phi.min(self.phi(x));
            min_psi = min_psi.min(self.psi(x));
        }
        let ls = &self.lambda_star;
        let positivity_bound = if ls[0][0] != 0.0 {
            ((self.l + 1.0) * ls[1][1] / ((self.k + 1.0) * ls[0][0]) * self.c1)
                .abs()
                .max(self.c1.abs())
        } else {
            f64::INFINITY
        };
        let positive = min_phi > 0.0 && min_psi > 0.0;

        let mut flux = None;
        let mut decay = None;
        if positive {
            let (ul, vl) = self.solution_dx(0.0, 0.0)?;
            let (ur, vr) = self.solution_dx(0.0, length)?;
            flux = Some(FluxReport {
                u_left: ul.abs(),
                v_left: vl.abs(),
                u_right: ur.abs(),
                v_right: vr.abs(),
            });
            // sampled sup norms over a time horizon
            let stamps = 50;
            let mut sup_u = Vec::with_capacity(stamps);
            let mut sup_v = Vec::with_capacity(stamps);
            for s in 0..stamps {
                let t = horizon * s as f64 / (stamps - 1) as f64;
                let mut mu = 0.0_f64;
                let mut mv = 0.0_f64;
                for i in 0..=nx {
                    let x = length * i as f64 / nx as f64;
                    let (u, v) = self.solution(t, x)?;
                    mu = mu.max(u.abs());
                    mv = mv.max(v.abs());
                }
                sup_u.push(mu);
                sup_v.push(mv);
            }
            let non_increasing =
                |s: &[f64]| s.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            decay = Some(DecayReport {
                horizon,
                sup_u_monotone: non_increasing(&sup_u),
                sup_v_monotone: non_increasing(&sup_v),
                sup_u_final: *sup_u.last().unwrap(),
                sup_v_final: *sup_v.last().unwrap(),
            });
        }
        Ok(BvpReport {
            interval: (0.0, length),
            min_phi,
            min_psi,
            positivity_bound,
            positive,
            flux,
            decay,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    pub u_left: f64,
    pub v_left: f64,
    pub u_right: f64,
    pub v_right: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub horizon: f64,
    pub sup_u_monotone: bool,
    pub sup_v_monotone: bool,
    pub sup_u_final: f64,
    pub sup_v_final: f64,
}

/// Outcome of the zero-flux boundary-value checks. `flux` and `decay` are
/// populated only when the profiles stay positive on the interval.
#[derive(Debug, Clone, Serialize)]
pub struct BvpReport {
    pub interval: (f64, f64),
    pub min_phi: f64,
    pub min_psi: f64,
    /// Positivity holds when `c4` exceeds this bound (informational; the
    /// `positive` flag comes from the sampled minima).
    pub positivity_bound: f64,
    pub positive: bool,
    pub flux: Option<FluxReport>,
    pub decay: Option<DecayReport>,
}

/// The flagship parameter set: `k = l = 1`, `ls = (2, -1; -2, 1)`,
/// `C1 = 0.2`, `C2 = 0`, `C4 = 0.25`, giving `h = sqrt(6)`.
pub fn flagship() -> PowerApplication {
    PowerApplication::new(1.0, 1.0, [[2.0, -1.0], [-2.0, 1.0]], 0.2, 0.0, 0.25)
        .expect("flagship parameters are admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn flagship_h_and_origin_values() {
        let app = flagship();
        close(app.h(), 6f64.sqrt(), 1e-15);
        let (u, v) = app.solution(0.0, 0.0).unwrap();
        close(u, 0.45f64.sqrt(), 1e-15);
        close(v, 0.3f64.sqrt(), 1e-14);
    }

    #[test]
    fn h_identity() {
        for (k, l, ls) in [
            (1.0, 1.0, [[2.0, -1.0], [-2.0, 1.0]]),
            (2.0, 0.5, [[1.0, 2.0], [0.25, 0.5]]),
        ] {
            let app = PowerApplication::new(k, l, ls, 0.1, 0.0, 0.5).unwrap();
            let h2 = (k + 1.0) * ls[0][0] + (l + 1.0) * ls[1][1];
            close(app.h() * app.h(), h2, 1e-12);
        }
    }

    #[test]
    fn profiles_agree_with_linear_family() {
        let app = flagship();
        let fam = app.family().unwrap();
        assert_eq!(fam.case_id(), 2);
        for i in 0..30 {
            let x = 0.045 * i as f64;
            let (phi, psi) = fam.eval_profile(x);
            close(app.phi(x), phi, 1e-13);
            close(app.psi(x), psi, 1e-13);
        }
    }

    #[test]
    fn spatially_uniform_when_c1_zero() {
        let app = PowerApplication::new(1.0, 1.0, [[2.0, -1.0], [-2.0, 1.0]], 0.0, 0.0, 0.25)
            .unwrap();
        let expected_u = 0.25f64.sqrt() * (-1.0_f64).exp();
        for x in [0.0, 0.3, 0.9] {
            let (u, _) = app.solution(1.0, x).unwrap();
            close(u, expected_u, 1e-14);
        }
    }

    #[test]
    fn flagship_bvp_passes() {
        let app = flagship();
        let report = app.check_bvp(1, 2.0, 800).unwrap();
        assert!(report.positive);
        close(report.positivity_bound, 0.2, 1e-15);
        let flux = report.flux.unwrap();
        assert!(flux.u_left < 1e-12 && flux.v_left < 1e-12);
        assert!(flux.u_right < 1e-12 && flux.v_right < 1e-12);
        assert!(report.min_phi > 0.0 && report.min_psi > 0.0);
        let decay = report.decay.unwrap();
        assert!(decay.sup_u_monotone && decay.sup_v_monotone);
    }

    #[test]
    fn small_c4_breaks_positivity() {
        let app = PowerApplication::new(1.0, 1.0, [[2.0, -1.0], [-2.0, 1.0]], 0.2, 0.0, 0.15)
            .unwrap();
        let report = app.check_bvp(1, 1.0, 400).unwrap();
        assert!(!report.positive);
        assert!(report.min_phi < 0.0);
        assert!(report.flux.is_none());
    }

    #[test]
    fn doubled_interval_keeps_zero_flux() {
        let app = flagship();
        let report = app.check_bvp(2, 1.0, 800).unwrap();
        let flux = report.flux.unwrap();
        assert!(flux.u_right < 1e-12 && flux.v_right < 1e-12);
        close(
            report.interval.1,
            2.0 * std::f64::consts::PI / 6f64.sqrt(),
            1e-14,
        );
    }

    #[test]
    fn nonzero_c2_rejected() {
        let app = PowerApplication::new(1.0, 1.0, [[2.0, -1.0], [-2.0, 1.0]], 0.2, 0.1, 0.25)
            .unwrap();
        assert!(matches!(app.check_bvp(1, 1.0, 100), Err(FamilyError::NeedsZeroC2(_))));
    }

    #[test]
    fn constraint_validation() {
        // determinant constraint broken
        assert!(PowerApplication::new(1.0, 1.0, [[2.0, -1.0], [-2.0, 1.5]], 0.2, 0.0, 0.25)
            .is_err());
        // k = -1 excluded
        assert!(PowerApplication::new(-1.0, 1.0, [[2.0, -1.0], [-2.0, 1.0]], 0.2, 0.0, 0.25)
            .is_err());
        // negative h^2
        assert!(
            PowerApplication::new(1.0, 1.0, [[-2.0, 1.0], [2.0, -1.0]], 0.2, 0.0, 0.25)
                .is_err()
        );
    }

    #[test]
    fn decay_rates_for_unit_exponents() {
        let app = flagship();
        // both components decay like e^(-t) when k = l = 1
        let (u0, v0) = app.solution(0.0, 0.2).unwrap();
        let (u1, v1) = app.solution(1.0, 0.2).unwrap();
        close(u1 / u0, (-1.0f64).exp(), 1e-12);
        close(v1 / v0, (-1.0f64).exp(), 1e-12);
    }
}
