//! The bivariate exponential shock model and its closed-form evaluators.
//!
//! Construction: with independent T1 ~ Exp(theta1), T2 ~ Exp(theta2) and a
//! single uniform U, the pair
//!
//! ```text
//! R = min{ T1, Finv(U) },    S = min{ T2, Finv(1 - U) },
//! ```
//!
//! where `Finv(u) = -ln(1-u)/theta12` is the Exp(theta12) quantile, couples
//! the two shock arrival times *antithetically* and produces negative
//! dependence ([`DepSign::Negative`]). Replacing the antithetic pair by one
//! shared shock `Finv(U)` on both coordinates gives the classical positively
//! dependent Marshall–Olkin model ([`DepSign::Positive`]). Swapping the roles
//! of U and 1-U in the negative construction merely swaps coordinates, so it
//! is not exposed as a separate model.
//!
//! Under negative coupling the joint survival is
//!
//! ```text
//! S(r,s) = exp(-theta1*r - theta2*s) * (e^{-theta12*r} + e^{-theta12*s} - 1)
//! ```
//!
//! on the region where `e^{-theta12*r} + e^{-theta12*s} >= 1`, and exactly 0
//! outside it. The distribution is mixed: an absolutely continuous part on
//! the interior of that region plus a singular part supported on the boundary
//! curve `s = g(r)`, where both minima in the construction are attained by
//! the coupled shocks. Marginals are Exp(theta1+theta12) and
//! Exp(theta2+theta12) under either sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_beta;

/// Direction of the shock coupling: `Positive` is the classical common-shock
/// Marshall–Olkin model, `Negative` the antithetic variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepSign {
    #[serde(rename = "+1")]
    Positive,
    #[serde(rename = "-1")]
    Negative,
}

impl DepSign {
    pub fn as_i8(self) -> i8 {
        match self {
            DepSign::Positive => 1,
            DepSign::Negative => -1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            1 => Ok(DepSign::Positive),
            -1 => Ok(DepSign::Negative),
            other => Err(Error::InvalidParameter(format!(
                "dependence sign must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl std::str::FromStr for DepSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" | "pos" | "positive" => Ok(DepSign::Positive),
            "-1" | "neg" | "negative" => Ok(DepSign::Negative),
            other => Err(Error::InvalidParameter(format!(
                "dependence sign must be +1 or -1, got '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for DepSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DepSign::Positive => "+1",
            DepSign::Negative => "-1",
        })
    }
}

/// The rate triple (theta1, theta2, theta12), all strictly positive and
/// finite.
///
/// The derived shape pair `alpha = theta12/(theta1+theta12)`,
/// `beta = theta12/(theta2+theta12)` governs every scale-free quantity
/// (dependence measures, singular mass, copula exponents) and always lies in
/// (0,1)^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnmoParams {
    theta1: f64,
    theta2: f64,
    theta12: f64,
}

impl BnmoParams {
    pub fn new(theta1: f64, theta2: f64, theta12: f64) -> Result<Self> {
        for (name, v) in [("theta1", theta1), ("theta2", theta2), ("theta12", theta12)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive finite rate, got {v}"
                )));
            }
        }
        Ok(Self { theta1, theta2, theta12 })
    }

    /// Parameters with the given shape pair and shock rate normalized to 1.
    /// Scale-free quantities depend on (alpha, beta) only, so this is the
    /// natural entry point for sweeps over the shape square.
    pub fn from_shape(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie strictly inside (0,1), got {v}"
                )));
            }
        }
        Self::new((1.0 - alpha) / alpha, (1.0 - beta) / beta, 1.0)
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn theta12(&self) -> f64 {
        self.theta12
    }

    /// Shape parameter theta12/(theta1+theta12).
    pub fn alpha(&self) -> f64 {
        self.theta12 / (self.theta1 + self.theta12)
    }

    /// Shape parameter theta12/(theta2+theta12).
    pub fn beta(&self) -> f64 {
        self.theta12 / (self.theta2 + self.theta12)
    }

    /// Marginal rate of the first coordinate, theta1 + theta12.
    pub fn rate_r(&self) -> f64 {
        self.theta1 + self.theta12
    }

    /// Marginal rate of the second coordinate, theta2 + theta12.
    pub fn rate_s(&self) -> f64 {
        self.theta2 + self.theta12
    }
}

/// Where a point sits relative to the negative model's support region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportRegion {
    /// Classification sum strictly above 1 + tol: carries the density.
    Interior,
    /// Classification sum within tol of 1: the singular curve.
    Boundary,
    /// Classification sum strictly below 1 - tol: zero probability.
    Exterior,
}

impl std::fmt::Display for SupportRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SupportRegion::Interior => "interior",
            SupportRegion::Boundary => "boundary",
            SupportRegion::Exterior => "exterior",
        })
    }
}

/// Classification of one point, with the statistic that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportVerdict {
    pub region: SupportRegion,
    /// The sum e^{-theta12*r} + e^{-theta12*s} the classification compared
    /// against 1.
    pub sum: f64,
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!(
            "{name} must be non-negative and finite, got {v}"
        )));
    }
    Ok(())
}

/// Value of the support statistic e^{-theta12*r} + e^{-theta12*s}.
pub fn support_sum(p: &BnmoParams, r: f64, s: f64) -> Result<f64> {
    check_non_negative("r", r)?;
    check_non_negative("s", s)?;
    Ok((-p.theta12() * r).exp() + (-p.theta12() * s).exp())
}

/// Classify (r, s) against the negative model's support with tolerance `tol`:
/// boundary iff |sum - 1| <= tol, interior iff sum > 1 + tol, else exterior.
pub fn classify_support(p: &BnmoParams, r: f64, s: f64, tol: f64) -> Result<SupportVerdict> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "support tolerance must be non-negative and finite, got {tol}"
        )));
    }
    let sum = support_sum(p, r, s)?;
    let region = if (sum - 1.0).abs() <= tol {
        SupportRegion::Boundary
    } else if sum > 1.0 {
        SupportRegion::Interior
    } else {
        SupportRegion::Exterior
    };
    Ok(SupportVerdict { region, sum })
}

/// Joint survival P(R > r, S > s) under either coupling sign.
///
/// For the negative sign the value is exactly 0 on the exterior region; the
/// crossing into the exterior is where the singular curve carries its mass.
pub fn joint_survival(p: &BnmoParams, sign: DepSign, r: f64, s: f64) -> Result<f64> {
    check_non_negative("r", r)?;
    check_non_negative("s", s)?;
    match sign {
        DepSign::Positive => {
            Ok((-p.theta1() * r - p.theta2() * s - p.theta12() * r.max(s)).exp())
        }
        DepSign::Negative => {
            let bracket = (-p.theta12() * r).exp() + (-p.theta12() * s).exp() - 1.0;
            if bracket <= 0.0 {
                return Ok(0.0);
            }
            Ok((-p.theta1() * r - p.theta2() * s).exp() * bracket)
        }
    }
}

/// Joint CDF P(R <= r, S <= s) via inclusion–exclusion on the survival
/// functions.
pub fn joint_cdf(p: &BnmoParams, sign: DepSign, r: f64, s: f64) -> Result<f64> {
    let joint = joint_survival(p, sign, r, s)?;
    let mr = marginal_survival_r(p, r)?;
    let ms = marginal_survival_s(p, s)?;
    // Clamp: inclusion-exclusion can dip a few ulps below zero near the origin.
    Ok((1.0 - mr - ms + joint).max(0.0))
}

/// Marginal survival of R: exp(-(theta1+theta12) r).
pub fn marginal_survival_r(p: &BnmoParams, r: f64) -> Result<f64> {
    check_non_negative("r", r)?;
    Ok((-p.rate_r() * r).exp())
}

/// Marginal survival of S: exp(-(theta2+theta12) s).
pub fn marginal_survival_s(p: &BnmoParams, s: f64) -> Result<f64> {
    check_non_negative("s", s)?;
    Ok((-p.rate_s() * s).exp())
}

/// Classification slack used when evaluating the density: points within one
/// part in 10^12 of the curve cannot be told apart from boundary points at
/// double precision, so they are rejected as boundary rather than given an
/// arbitrary interior value.
const DENSITY_BOUNDARY_TOL: f64 = 1e-12;

/// Natural log of the absolutely continuous density on the interior region.
///
/// Split out from [`density_continuous`] because the likelihood needs the log
/// form directly: for observations far out in the tails the density
/// underflows while its log stays well scaled.
pub fn log_density_continuous(p: &BnmoParams, r: f64, s: f64) -> Result<f64> {
    let verdict = classify_support(p, r, s, DENSITY_BOUNDARY_TOL)?;
    if verdict.region != SupportRegion::Interior {
        return Err(Error::OutsideInterior { region: verdict.region, sum: verdict.sum });
    }
    let er = (-p.theta12() * r).exp();
    let es = (-p.theta12() * s).exp();
    let bracket = p.theta2() * p.rate_r() * er + p.theta1() * p.rate_s() * es
        - p.theta1() * p.theta2();
    // On the closed support the bracket is bounded below by
    // theta12 * (theta2*er + theta1*es) > 0, so the log is finite.
    Ok(-p.theta1() * r - p.theta2() * s + bracket.ln())
}

/// Density of the absolutely continuous component at an interior point.
/// Boundary and exterior points are domain errors naming the region.
pub fn density_continuous(p: &BnmoParams, r: f64, s: f64) -> Result<f64> {
    Ok(log_density_continuous(p, r, s)?.exp())
}

/// The singular support curve g(r) = -ln(1 - e^{-theta12 r}) / theta12,
/// defined for r > 0. The curve is strictly decreasing and satisfies
/// e^{-theta12 r} + e^{-theta12 g(r)} = 1 identically.
pub fn singular_curve(p: &BnmoParams, r: f64) -> Result<f64> {
    check_non_negative("r", r)?;
    if r == 0.0 {
        return Err(Error::Domain(
            "the singular curve diverges at r = 0; it is defined for r > 0 only".into(),
        ));
    }
    let q = -(-p.theta12() * r).exp_m1(); // 1 - e^{-theta12 r}, accurately
    Ok(-q.ln() / p.theta12())
}

/// Conditional probability mass that S jumps onto the singular curve given
/// R = r: h(r) = alpha * (1 - e^{-theta12 r})^{theta2/theta12}.
///
/// Increasing in r from 0 toward the ceiling alpha = theta12/(theta1+theta12).
/// Integrating h against the marginal density of R recovers the total
/// singular mass, which is the identity the exponent theta2/theta12 is pinned
/// by (see [`singular_mass`]).
pub fn singular_jump(p: &BnmoParams, r: f64) -> Result<f64> {
    check_non_negative("r", r)?;
    if r == 0.0 {
        return Err(Error::Domain(
            "the singular jump is defined for r > 0 only (the curve has no point at r = 0)".into(),
        ));
    }
    let q = -(-p.theta12() * r).exp_m1();
    Ok(p.alpha() * q.powf(p.theta2() / p.theta12()))
}

/// Total probability carried by the singular curve:
/// P = B(1/alpha, 1/beta), the Beta function of the reciprocal shapes.
///
/// Equals 1/6 whenever theta1 = theta2 = theta12 and tends to 0 as theta12
/// becomes small relative to the individual rates.
pub fn singular_mass(p: &BnmoParams) -> Result<f64> {
    Ok(log_beta(1.0 / p.alpha(), 1.0 / p.beta())?.exp())
}

/// Outcome of a grid comparison in the upper-orthant order.
#[derive(Debug, Clone, PartialEq)]
pub enum UoVerdict {
    /// First model's survival >= second's at every grid point.
    FirstDominates,
    /// Second model's survival >= first's at every grid point.
    SecondDominates,
    /// Identical shock rates: survivals agree everywhere.
    Equal,
    /// The expected ordering failed somewhere; offending points listed as
    /// (r, s, survival_a, survival_b).
    Violations(Vec<(f64, f64, f64, f64)>),
}

/// Compare two negative-model parameter sets sharing (theta1, theta2) in the
/// upper-orthant order on an `n x n` grid over [0, extent]^2.
///
/// A larger shock rate pushes survival down pointwise, so the model with the
/// smaller theta12 should dominate; the verdict reports which side dominates
/// or every grid point where the expected inequality failed.
pub fn uo_compare(a: &BnmoParams, b: &BnmoParams, n: usize, extent: f64) -> Result<UoVerdict> {
    if a.theta1() != b.theta1() || a.theta2() != b.theta2() {
        return Err(Error::Domain(format!(
            "upper-orthant comparison requires matching individual rates, got ({}, {}) vs ({}, {})",
            a.theta1(),
            a.theta2(),
            b.theta1(),
            b.theta2()
        )));
    }
    if n < 2 || !extent.is_finite() || extent <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "comparison grid needs n >= 2 and positive extent, got n = {n}, extent = {extent}"
        )));
    }
    if a.theta12() == b.theta12() {
        return Ok(UoVerdict::Equal);
    }
    // Expected dominant side: the smaller shock rate.
    let first_dominates = a.theta12() < b.theta12();
    let mut violations = Vec::new();
    let step = extent / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            let r = i as f64 * step;
            let s = j as f64 * step;
            let fa = joint_survival(a, DepSign::Negative, r, s)?;
            let fb = joint_survival(b, DepSign::Negative, r, s)?;
            let ok = if first_dominates { fa >= fb } else { fb >= fa };
            if !ok {
                violations.push((r, s, fa, fb));
            }
        }
    }
    if !violations.is_empty() {
        return Ok(UoVerdict::Violations(violations));
    }
    Ok(if first_dominates { UoVerdict::FirstDominates } else { UoVerdict::SecondDominates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p111() -> BnmoParams {
        BnmoParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(BnmoParams::new(0.0, 1.0, 1.0).is_err());
        assert!(BnmoParams::new(1.0, -2.0, 1.0).is_err());
        assert!(BnmoParams::new(1.0, 1.0, f64::INFINITY).is_err());
        assert!(BnmoParams::from_shape(0.0, 0.5).is_err());
        assert!(BnmoParams::from_shape(0.5, 1.0).is_err());
        let p = BnmoParams::from_shape(0.25, 0.4).unwrap();
        assert_relative_eq!(p.alpha(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(p.beta(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn shape_parameters_match_definitions() {
        let p = BnmoParams::new(1.0, 3.0, 0.8).unwrap();
        assert_relative_eq!(p.alpha(), 0.8 / 1.8, epsilon = 1e-15);
        assert_relative_eq!(p.beta(), 0.8 / 3.8, epsilon = 1e-15);
        assert_relative_eq!(p.rate_r(), 1.8, epsilon = 1e-15);
        assert_relative_eq!(p.rate_s(), 3.8, epsilon = 1e-15);
    }

    #[test]
    fn support_classification_cases() {
        let p = p111();
        // Deep inside: small coordinates.
        let v = classify_support(&p, 0.1, 0.1, 1e-9).unwrap();
        assert_eq!(v.region, SupportRegion::Interior);
        // On the curve: s = g(r).
        let r = 0.7;
        let s = singular_curve(&p, r).unwrap();
        let v = classify_support(&p, r, s, 1e-9).unwrap();
        assert_eq!(v.region, SupportRegion::Boundary);
        // Far outside: sum = 2 e^{-2} ≈ 0.27.
        let v = classify_support(&p, 2.0, 2.0, 1e-9).unwrap();
        assert_eq!(v.region, SupportRegion::Exterior);
        assert_relative_eq!(v.sum, 2.0 * (-2.0_f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn survival_known_values() {
        let p = p111();
        // e^{-0.4} (2 e^{-0.2} - 1) at (0.2, 0.2).
        let expect = (-0.4_f64).exp() * (2.0 * (-0.2_f64).exp() - 1.0);
        assert_relative_eq!(
            joint_survival(&p, DepSign::Negative, 0.2, 0.2).unwrap(),
            expect,
            epsilon = 1e-14
        );
        assert_relative_eq!(expect, 0.42730, epsilon = 5e-5);
        // Exterior: exactly zero.
        assert_eq!(joint_survival(&p, DepSign::Negative, 2.0, 2.0).unwrap(), 0.0);
        // Positive sign at the same point: e^{-0.2-0.2-0.2}.
        assert_relative_eq!(
            joint_survival(&p, DepSign::Positive, 0.2, 0.2).unwrap(),
            (-0.6_f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn survival_at_origin_is_one() {
        for sign in [DepSign::Negative, DepSign::Positive] {
            assert_eq!(joint_survival(&p111(), sign, 0.0, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn marginal_survival_values() {
        let p = BnmoParams::new(1.0, 3.0, 0.8).unwrap();
        assert_relative_eq!(
            marginal_survival_s(&p, 0.5).unwrap(),
            (-1.9_f64).exp(),
            epsilon = 1e-14
        );
        assert_relative_eq!((-1.9_f64).exp(), 0.14957, epsilon = 5e-6);
        assert_relative_eq!(
            marginal_survival_r(&p, 0.5).unwrap(),
            (-0.9_f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn cdf_by_inclusion_exclusion() {
        // 1 - 2 e^{-0.4} + e^{-0.4}(2 e^{-0.2} - 1) at (0.2, 0.2) for the
        // symmetric unit-rate model; equals 1 - e^{-0.4}(3 - 2 e^{-0.2}).
        let expect = 1.0 - (-0.4_f64).exp() * (3.0 - 2.0 * (-0.2_f64).exp());
        let got = joint_cdf(&p111(), DepSign::Negative, 0.2, 0.2).unwrap();
        assert_relative_eq!(got, expect, epsilon = 1e-14);
        assert_relative_eq!(got, 0.086663, epsilon = 1e-6);
    }

    #[test]
    fn cdf_limits() {
        let p = p111();
        assert_eq!(joint_cdf(&p, DepSign::Negative, 0.0, 0.0).unwrap(), 0.0);
        let far = joint_cdf(&p, DepSign::Negative, 40.0, 40.0).unwrap();
        assert_relative_eq!(far, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn density_known_value_and_finite_difference() {
        let p = p111();
        // e^{-0.2}(4 e^{-0.1} - 1) at (0.1, 0.1).
        let expect = (-0.2_f64).exp() * (4.0 * (-0.1_f64).exp() - 1.0);
        let got = density_continuous(&p, 0.1, 0.1).unwrap();
        assert_relative_eq!(got, expect, epsilon = 1e-13);

        // Central second difference of the survival surface.
        let h = 1e-4;
        let f = |r: f64, s: f64| joint_survival(&p, DepSign::Negative, r, s).unwrap();
        let fd = (f(0.1 + h, 0.1 + h) - f(0.1 + h, 0.1 - h) - f(0.1 - h, 0.1 + h)
            + f(0.1 - h, 0.1 - h))
            / (4.0 * h * h);
        assert_relative_eq!(got, fd, max_relative = 1e-4);
    }

    #[test]
    fn density_rejects_non_interior_points() {
        let p = p111();
        let err = density_continuous(&p, 2.0, 2.0).unwrap_err();
        match err {
            Error::OutsideInterior { region, .. } => assert_eq!(region, SupportRegion::Exterior),
            other => panic!("expected OutsideInterior, got {other:?}"),
        }
        // A point placed exactly on the curve classifies as boundary or (one
        // ulp off) exterior; either way it is not interior.
        let r = 0.4;
        let s = singular_curve(&p, r).unwrap();
        let err = density_continuous(&p, r, s).unwrap_err();
        assert!(matches!(err, Error::OutsideInterior { .. }));
    }

    #[test]
    fn singular_curve_values_and_identity() {
        let p2 = BnmoParams::new(1.0, 1.0, 2.0).unwrap();
        // -(1/2) ln(1 - e^{-1}) ≈ 0.229338.
        let g = singular_curve(&p2, 0.5).unwrap();
        assert_relative_eq!(g, -0.5 * (1.0 - (-1.0_f64).exp()).ln(), epsilon = 1e-14);
        assert_relative_eq!(g, 0.2293384, epsilon = 1e-6);
        // Identity e^{-θ12 r} + e^{-θ12 g(r)} = 1 across scales.
        for &r in &[1e-3, 0.2, 1.0, 4.0, 20.0] {
            let g = singular_curve(&p2, r).unwrap();
            let sum = (-2.0 * r).exp() + (-2.0 * g).exp();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        }
        assert!(singular_curve(&p2, 0.0).is_err());
    }

    #[test]
    fn singular_curve_is_decreasing_and_self_inverse() {
        let p = p111();
        let mut prev = f64::INFINITY;
        for i in 1..60 {
            let r = i as f64 * 0.1;
            let g = singular_curve(&p, r).unwrap();
            assert!(g < prev);
            prev = g;
            // g(g(r)) = r: the curve is an involution.
            let back = singular_curve(&p, g).unwrap();
            assert_relative_eq!(back, r, max_relative = 1e-9);
        }
    }

    #[test]
    fn singular_jump_values() {
        // θ = (1,1,1), r = ln 2: (1/2)(1/2)^1 = 1/4.
        let h = singular_jump(&p111(), std::f64::consts::LN_2).unwrap();
        assert_relative_eq!(h, 0.25, epsilon = 1e-14);
        // θ = (1,2,1), r = ln 2: (1/2)(1/2)^2 = 1/8.
        let p = BnmoParams::new(1.0, 2.0, 1.0).unwrap();
        let h = singular_jump(&p, std::f64::consts::LN_2).unwrap();
        assert_relative_eq!(h, 0.125, epsilon = 1e-14);
        // r → ∞ ceiling is alpha.
        let h = singular_jump(&p111(), 500.0).unwrap();
        assert_relative_eq!(h, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn singular_mass_values() {
        // Symmetric: B(2,2) = 1/6.
        assert_relative_eq!(singular_mass(&p111()).unwrap(), 1.0 / 6.0, epsilon = 1e-12);
        // θ = (1,2,1): B(2,3) = 1/12.
        let p = BnmoParams::new(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(singular_mass(&p).unwrap(), 1.0 / 12.0, epsilon = 1e-12);
        // Weak coupling: mass vanishes.
        let p = BnmoParams::new(1.0, 1.0, 1e-4).unwrap();
        assert!(singular_mass(&p).unwrap() < 1e-3);
    }

    #[test]
    fn jump_integrates_to_singular_mass() {
        // ∫ h(r) f_R(r) dr over (0, ∞) must reproduce B(1/α, 1/β): this is
        // the identity that pins the jump exponent to theta2/theta12.
        use crate::numerics::{integrate_1d, QuadratureConfig};
        for (t1, t2, t12) in [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (0.5, 3.0, 1.25)] {
            let p = BnmoParams::new(t1, t2, t12).unwrap();
            let rate = p.rate_r();
            let integral = integrate_1d(
                |r| {
                    if r <= 0.0 {
                        return 0.0;
                    }
                    singular_jump(&p, r).unwrap() * rate * (-rate * r).exp()
                },
                0.0,
                f64::INFINITY,
                &QuadratureConfig { abs_tol: 1e-12, rel_tol: 1e-11, max_subdivisions: 5000 },
            )
            .unwrap();
            assert_relative_eq!(integral, singular_mass(&p).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn continuous_plus_singular_mass_is_one() {
        // Substituting u = e^{-θ12 r}, v = e^{-θ12 s} maps the interior to
        // the triangle {u + v > 1} of the unit square and the density to
        // f(r(u), s(v)) / (θ12² u v). Mapping that triangle back to the unit
        // square by u = 1 - a·t, v = 1 - (1-a)·t (Jacobian t, with t = 1 the
        // singular curve) leaves a smooth integrand, so the quadrature
        // converges without fighting a kink. The absolutely continuous mass
        // plus the Beta mass of the curve must account for everything.
        use crate::numerics::{integrate_2d, QuadratureConfig};
        let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-8, max_subdivisions: 60_000 };
        for (t1, t2, t12) in [(1.0, 1.0, 1.0), (1.0, 3.0, 0.8), (2.0, 0.5, 1.5)] {
            let p = BnmoParams::new(t1, t2, t12).unwrap();
            let ac = integrate_2d(
                |a: f64, t: f64| {
                    let u = 1.0 - a * t;
                    let v = 1.0 - (1.0 - a) * t;
                    if u <= 0.0 || v <= 0.0 || u + v <= 1.0 {
                        return 0.0;
                    }
                    let r = -u.ln() / t12;
                    let s = -v.ln() / t12;
                    match density_continuous(&p, r, s) {
                        Ok(f) => f * t / (t12 * t12 * u * v),
                        Err(_) => 0.0, // boundary-tolerance shell around the curve
                    }
                },
                (0.0, 1.0),
                (0.0, 1.0),
                &cfg,
            )
            .unwrap();
            let total = ac + singular_mass(&p).unwrap();
            assert_relative_eq!(total, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn survival_at_axis_reduces_to_the_marginal() {
        let p = BnmoParams::new(1.0, 3.0, 0.8).unwrap();
        for t in [0.0, 0.4, 2.0] {
            for sign in [DepSign::Negative, DepSign::Positive] {
                assert_relative_eq!(
                    joint_survival(&p, sign, t, 0.0).unwrap(),
                    marginal_survival_r(&p, t).unwrap(),
                    epsilon = 1e-15
                );
                assert_relative_eq!(
                    joint_survival(&p, sign, 0.0, t).unwrap(),
                    marginal_survival_s(&p, t).unwrap(),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn uo_comparison_directions() {
        let a = p111();
        let b = BnmoParams::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!(uo_compare(&a, &b, 50, 3.0).unwrap(), UoVerdict::FirstDominates);
        assert_eq!(uo_compare(&b, &a, 50, 3.0).unwrap(), UoVerdict::SecondDominates);
        assert_eq!(uo_compare(&a, &a.clone(), 50, 3.0).unwrap(), UoVerdict::Equal);
        let c = BnmoParams::new(2.0, 1.0, 1.0).unwrap();
        assert!(uo_compare(&a, &c, 10, 3.0).is_err());
    }

    #[test]
    fn negative_inputs_are_domain_errors() {
        let p = p111();
        assert!(joint_survival(&p, DepSign::Negative, -0.1, 0.5).is_err());
        assert!(joint_survival(&p, DepSign::Positive, 0.1, -0.5).is_err());
        assert!(marginal_survival_r(&p, -1.0).is_err());
        assert!(singular_curve(&p, -2.0).is_err());
        assert!(classify_support(&p, f64::NAN, 0.0, 1e-9).is_err());
    }

    #[test]
    fn sign_parsing_round_trips() {
        assert_eq!("+1".parse::<DepSign>().unwrap(), DepSign::Positive);
        assert_eq!("-1".parse::<DepSign>().unwrap(), DepSign::Negative);
        assert_eq!(DepSign::from_i8(-1).unwrap().as_i8(), -1);
        assert!("2".parse::<DepSign>().is_err());
        assert_eq!(DepSign::Negative.to_string(), "-1");
    }

    proptest! {
        #[test]
        fn survival_bounds_and_monotonicity(
            t1 in 0.05_f64..5.0,
            t2 in 0.05_f64..5.0,
            t12 in 0.05_f64..5.0,
            r in 0.0_f64..4.0,
            s in 0.0_f64..4.0,
        ) {
            let p = BnmoParams::new(t1, t2, t12).unwrap();
            for sign in [DepSign::Negative, DepSign::Positive] {
                let v = joint_survival(&p, sign, r, s).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
                // Monotone non-increasing in each coordinate.
                let v_r = joint_survival(&p, sign, r + 0.1, s).unwrap();
                let v_s = joint_survival(&p, sign, r, s + 0.1).unwrap();
                prop_assert!(v_r <= v + 1e-15);
                prop_assert!(v_s <= v + 1e-15);
                // Bounded above by both marginal survivals.
                let mr = marginal_survival_r(&p, r).unwrap();
                let ms = marginal_survival_s(&p, s).unwrap();
                prop_assert!(v <= mr + 1e-15);
                prop_assert!(v <= ms + 1e-15);
            }
        }

        #[test]
        fn negative_sign_never_exceeds_independence(
            t1 in 0.05_f64..5.0,
            t2 in 0.05_f64..5.0,
            t12 in 0.05_f64..5.0,
            r in 0.0_f64..4.0,
            s in 0.0_f64..4.0,
        ) {
            // Negative quadrant dependence: survival at most the product of
            // marginals; the positive sign at least the product.
            let p = BnmoParams::new(t1, t2, t12).unwrap();
            let indep = marginal_survival_r(&p, r).unwrap() * marginal_survival_s(&p, s).unwrap();
            let neg = joint_survival(&p, DepSign::Negative, r, s).unwrap();
            let pos = joint_survival(&p, DepSign::Positive, r, s).unwrap();
            prop_assert!(neg <= indep + 1e-14);
            prop_assert!(pos >= indep - 1e-14);
        }

        #[test]
        fn cdf_in_unit_interval(
            t12 in 0.05_f64..5.0,
            r in 0.0_f64..6.0,
            s in 0.0_f64..6.0,
        ) {
            let p = BnmoParams::new(1.0, 2.0, t12).unwrap();
            let c = joint_cdf(&p, DepSign::Negative, r, s).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
        }

        #[test]
        fn alpha_beta_in_unit_square(
            t1 in 1e-3_f64..1e3,
            t2 in 1e-3_f64..1e3,
            t12 in 1e-3_f64..1e3,
        ) {
            let p = BnmoParams::new(t1, t2, t12).unwrap();
            prop_assert!(p.alpha() > 0.0 && p.alpha() < 1.0);
            prop_assert!(p.beta() > 0.0 && p.beta() < 1.0);
        }
    }
}
