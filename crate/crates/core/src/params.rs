//! Model parameters, hypothesis validation, and closed-form constants.
//!
//! The system carries three positive constants `(a1, a2, r)`. Everything
//! downstream assumes the transformed cooperative form obtained through
//! `v -> 1 - v`, whose fronts connect (0,0) to (1,1).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative tolerance for classifying a speed as critical.
pub const CRITICAL_SPEED_RTOL: f64 = 1e-10;

/// Competition parameters of the system. Immutable value type; all derived
/// constants are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a1: f64,
    pub a2: f64,
    pub r: f64,
}

impl ModelParams {
    /// Builds a parameter set. Only finiteness is enforced here; the
    /// hypotheses are reported (not enforced) by [`validate_hypotheses`],
    /// so deliberately out-of-range values can still be examined.
    pub fn new(a1: f64, a2: f64, r: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite() && r.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite parameter: a1={a1}, a2={a2}, r={r}"
            )));
        }
        Ok(ModelParams { a1, a2, r })
    }

    /// Linearization coefficient at the zero state, `1 - a1`.
    pub fn d1(&self) -> f64 {
        1.0 - self.a1
    }

    /// Reaction term of the transformed u-equation.
    pub fn f1(&self, u: f64, v: f64) -> f64 {
        u * (1.0 - self.a1 - u + self.a1 * v)
    }

    /// Reaction term of the transformed v-equation.
    pub fn f2(&self, u: f64, v: f64) -> f64 {
        self.r * (1.0 - v) * (self.a2 * u - v)
    }
}

/// Outcome of checking H1-H3, with the signed slack of each inequality.
/// H2 is non-strict (zero margin passes); H1 and H3 are strict.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub margin_h1: f64,
    pub margin_h2: f64,
    pub margin_h3: f64,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1 && self.h2 && self.h3
    }
}

/// Checks the three hypotheses:
/// H1: 0 < a1 < 1 < a2 (and r > 0, folded into the same margin),
/// H2: 1 - a1 <= r (a2 - 1),
/// H3: r (a2 - 1) < (1 - a1)(2 - a1 + r).
pub fn validate_hypotheses(p: &ModelParams) -> HypothesisReport {
    let margin_h1 = p
        .a1
        .min(1.0 - p.a1)
        .min(p.a2 - 1.0)
        .min(p.r);
    let margin_h2 = p.r * (p.a2 - 1.0) - (1.0 - p.a1);
    let margin_h3 = (1.0 - p.a1) * (2.0 - p.a1 + p.r) - p.r * (p.a2 - 1.0);
    HypothesisReport {
        h1: margin_h1 > 0.0,
        h2: margin_h2 >= 0.0,
        h3: margin_h3 > 0.0,
        margin_h1,
        margin_h2,
        margin_h3,
    }
}

/// Minimal wave speed `c* = 2 sqrt(1 - a1)`. Requires H1.
pub fn minimal_speed(p: &ModelParams) -> Result<f64> {
    let report = validate_hypotheses(p);
    if !report.h1 {
        return Err(Error::HypothesisViolated(format!(
            "H1 fails (margin {:.3e}); minimal speed undefined",
            report.margin_h1
        )));
    }
    Ok(2.0 * (1.0 - p.a1).sqrt())
}

/// Speed regime relative to the minimal speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedRegime {
    Supercritical,
    Critical,
    Subcritical,
}

/// A wave speed together with its regime classification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpeedSpec {
    pub c: f64,
    pub regime: SpeedRegime,
}

impl SpeedSpec {
    /// Classifies `c` against `c*`. `|c - c*| <= 1e-10 max(1, c*)` counts
    /// as critical; a computed speed is never exactly `c*`.
    pub fn classify(p: &ModelParams, c: f64) -> Result<SpeedSpec> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidParams(format!("speed must be positive, got {c}")));
        }
        let c_star = minimal_speed(p)?;
        let tol = CRITICAL_SPEED_RTOL * c_star.max(1.0);
        let regime = if (c - c_star).abs() <= tol {
            SpeedRegime::Critical
        } else if c > c_star {
            SpeedRegime::Supercritical
        } else {
            SpeedRegime::Subcritical
        };
        Ok(SpeedSpec { c, regime })
    }
}

/// Branch of the decay structure at +infinity, split on `r (a2 - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `r (a2 - 1) <= 1`: both components share one decay rate.
    Small,
    /// `r (a2 - 1) > 1`: the u-component decays strictly slower.
    Large,
}

/// Predicted tail exponents of the wave. `lambda_minus` is the growth rate
/// of both components toward the zero state; `mu_u_plus`/`mu_v_plus` are the
/// decay-rate magnitudes of `1-u` and `1-v` toward the (1,1) state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentSet {
    pub lambda_minus: f64,
    pub mu_u_plus: f64,
    pub mu_v_plus: f64,
    pub branch: Branch,
    /// True at the critical speed, where the tail at -infinity carries a
    /// linear polynomial factor `(A + B xi) e^{lambda xi}`.
    pub critical_polynomial: bool,
}

/// Closed-form tail exponents for a supercritical or critical speed.
pub fn predicted_exponents(p: &ModelParams, s: &SpeedSpec) -> Result<ExponentSet> {
    let report = validate_hypotheses(p);
    if !report.all_pass() {
        return Err(Error::HypothesisViolated(format!(
            "h1={} h2={} h3={}",
            report.h1, report.h2, report.h3
        )));
    }
    let c = s.c;
    let d1 = p.d1();
    let q = p.r * (p.a2 - 1.0);
    let branch = if q <= 1.0 { Branch::Small } else { Branch::Large };
    match s.regime {
        SpeedRegime::Subcritical => Err(Error::SubcriticalSpeed {
            c,
            c_star: 2.0 * d1.sqrt(),
        }),
        SpeedRegime::Supercritical => {
            let lambda_minus = (c - (c * c - 4.0 * d1).sqrt()) / 2.0;
            let mu_v_plus = ((c * c + 4.0 * q).sqrt() - c) / 2.0;
            let mu_u_plus = match branch {
                Branch::Small => mu_v_plus,
                Branch::Large => ((c * c + 4.0).sqrt() - c) / 2.0,
            };
            Ok(ExponentSet {
                lambda_minus,
                mu_u_plus,
                mu_v_plus,
                branch,
                critical_polynomial: false,
            })
        }
        SpeedRegime::Critical => {
            let lambda_minus = d1.sqrt();
            let mu_v_plus = (d1 + q).sqrt() - d1.sqrt();
            let mu_u_plus = match branch {
                Branch::Small => mu_v_plus,
                Branch::Large => (2.0 - p.a1).sqrt() - d1.sqrt(),
            };
            Ok(ExponentSet {
                lambda_minus,
                mu_u_plus,
                mu_v_plus,
                branch,
                critical_polynomial: true,
            })
        }
    }
}

/// Half-width large enough that every predicted tail satisfies
/// `e^{-rate L} < 1e-8` with room for the fit windows; at least 60.
/// Truncation selects the front's phase at the slowest-tail scale, so
/// slower tails need a longer box both for the rate fits and for the
/// iteration's residual floor.
pub fn recommended_half_width(p: &ModelParams, c: f64) -> Result<f64> {
    let spec = SpeedSpec::classify(p, c)?;
    let e = predicted_exponents(p, &spec)?;
    let slowest = e
        .lambda_minus
        .min(e.mu_u_plus)
        .min(e.mu_v_plus)
        .max(1e-3);
    Ok((18.5 / slowest + 30.0).max(60.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(a1: f64, a2: f64, r: f64) -> ModelParams {
        ModelParams::new(a1, a2, r).unwrap()
    }

    #[test]
    fn hypotheses_reference_set() {
        let rep = validate_hypotheses(&p(0.5, 2.0, 0.5));
        assert!(rep.h1 && rep.h2 && rep.h3);
        // H2 margin is exactly zero here and still passes (non-strict).
        assert_eq!(rep.margin_h2, 0.0);
        assert!((rep.margin_h3 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hypotheses_h1_violation() {
        let rep = validate_hypotheses(&p(1.2, 2.0, 1.0));
        assert!(!rep.h1);
        assert!(rep.margin_h1 < 0.0);
    }

    #[test]
    fn hypotheses_h3_violation() {
        // r(a2-1) = 5 vs (1-a1)(2-a1+r) = 0.5 * 6.5 = 3.25
        let rep = validate_hypotheses(&p(0.5, 2.0, 5.0));
        assert!(rep.h1 && rep.h2 && !rep.h3);
        assert!((rep.margin_h3 - (3.25 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(ModelParams::new(f64::NAN, 2.0, 0.5).is_err());
        assert!(ModelParams::new(0.5, f64::INFINITY, 0.5).is_err());
    }

    #[test]
    fn minimal_speed_values() {
        assert!((minimal_speed(&p(0.5, 2.0, 0.5)).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((minimal_speed(&p(0.75, 2.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        // a1 = 0 violates H1 strictly
        assert!(minimal_speed(&p(0.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn exponents_small_branch_supercritical() {
        let pp = p(0.5, 2.0, 0.5);
        let s = SpeedSpec::classify(&pp, 2.0).unwrap();
        assert_eq!(s.regime, SpeedRegime::Supercritical);
        let e = predicted_exponents(&pp, &s).unwrap();
        assert_eq!(e.branch, Branch::Small);
        assert!(!e.critical_polynomial);
        assert!((e.lambda_minus - (2.0 - 2.0f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((e.mu_u_plus - (6.0f64.sqrt() - 2.0) / 2.0).abs() < 1e-12);
        assert_eq!(e.mu_u_plus, e.mu_v_plus);
    }

    #[test]
    fn exponents_critical() {
        let pp = p(0.5, 2.0, 0.5);
        let s = SpeedSpec::classify(&pp, 2.0f64.sqrt()).unwrap();
        assert_eq!(s.regime, SpeedRegime::Critical);
        let e = predicted_exponents(&pp, &s).unwrap();
        assert!(e.critical_polynomial);
        assert!((e.lambda_minus - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((e.mu_u_plus - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn exponents_large_branch() {
        let pp = p(0.2, 2.0, 2.0);
        let s = SpeedSpec::classify(&pp, 2.0).unwrap();
        let e = predicted_exponents(&pp, &s).unwrap();
        assert_eq!(e.branch, Branch::Large);
        assert!((e.mu_u_plus - (8.0f64.sqrt() - 2.0) / 2.0).abs() < 1e-12);
        assert!((e.mu_v_plus - (12.0f64.sqrt() - 2.0) / 2.0).abs() < 1e-12);
        assert!(e.mu_u_plus < e.mu_v_plus);
    }

    #[test]
    fn exponents_subcritical_rejected() {
        let pp = p(0.5, 2.0, 0.5);
        let s = SpeedSpec::classify(&pp, 1.0).unwrap();
        assert_eq!(s.regime, SpeedRegime::Subcritical);
        assert!(matches!(
            predicted_exponents(&pp, &s),
            Err(Error::SubcriticalSpeed { .. })
        ));
    }

    #[test]
    fn critical_classification_tolerance() {
        let pp = p(0.5, 2.0, 0.5);
        // a 10-digit decimal approximation of sqrt(2) classifies as critical
        let s = SpeedSpec::classify(&pp, 1.4142135624).unwrap();
        assert_eq!(s.regime, SpeedRegime::Critical);
    }

    proptest! {
        #[test]
        fn minimal_speed_squared_exact(a1 in 0.01f64..0.99) {
            let pp = p(a1, 2.0, 1.0);
            let cs = minimal_speed(&pp).unwrap();
            prop_assert!((cs * cs - 4.0 * (1.0 - a1)).abs() <= 8.0 * f64::EPSILON * cs * cs);
        }

        #[test]
        fn discriminant_sign_partitions_regimes(a1 in 0.05f64..0.95, dc in -0.5f64..0.5) {
            let pp = p(a1, 2.0, 1.0);
            let c_star = minimal_speed(&pp).unwrap();
            let c = (c_star + dc).max(0.01);
            let disc = c * c - 4.0 * (1.0 - a1);
            let s = SpeedSpec::classify(&pp, c).unwrap();
            match s.regime {
                SpeedRegime::Subcritical => prop_assert!(disc < 0.0),
                SpeedRegime::Supercritical => prop_assert!(disc > 0.0),
                SpeedRegime::Critical => prop_assert!(disc.abs() < 1e-9),
            }
        }

        #[test]
        fn large_branch_strict_order(a1 in 0.05f64..0.5, c_off in 0.01f64..2.0) {
            // pick r, a2 so that r(a2-1) > 1 while H2, H3 hold
            let pp = p(a1, 2.0, 2.0);
            let rep = validate_hypotheses(&pp);
            prop_assume!(rep.all_pass());
            prop_assume!(pp.r * (pp.a2 - 1.0) > 1.0);
            let c = minimal_speed(&pp).unwrap() + c_off;
            let s = SpeedSpec::classify(&pp, c).unwrap();
            let e = predicted_exponents(&pp, &s).unwrap();
            prop_assert!(e.mu_u_plus < e.mu_v_plus);
        }

        #[test]
        fn margins_monotone_in_a1(a1 in 0.1f64..0.9, da in 0.001f64..0.05) {
            // perturbing a1 downward strictly increases the H1 (1-a1 part)
            // and H3 margins, other fields fixed
            let hi = validate_hypotheses(&p(a1, 2.0, 1.0));
            let lo = validate_hypotheses(&p(a1 - da, 2.0, 1.0));
            prop_assert!(lo.margin_h3 > hi.margin_h3);
            prop_assume!(a1 - da > 0.5); // the min() in h1 is the 1-a1 piece
            prop_assert!(lo.margin_h1 > hi.margin_h1);
        }
    }
}
