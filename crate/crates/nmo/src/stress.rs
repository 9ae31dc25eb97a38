//! Failure-order analytics for a negatively coupled pair: which component
//! fails first, when, and with what probability.
//!
//! A structural fact drives everything here: the support condition
//! `e^{-θ₁₂r} + e^{-θ₁₂s} ≥ 1` forces `min(R,S) ≤ t*` with
//! `t* = ln 2 / θ₁₂`, almost surely. The first failure therefore happens by
//! a hard deadline, the cause-specific sub-densities vanish beyond `t*`
//! (with a jump discontinuity at `t*` itself), and the first-failure
//! probability is the cause-1 sub-distribution evaluated *at the cutoff* —
//! not the naive `t → ∞` limit of its unclipped antiderivative, which
//! overstates the probability whenever the two individual rates differ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BnmoParams;

/// Which coordinate of the pair fails first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    /// The event `{R < S}`.
    First,
    /// The event `{S < R}`.
    Second,
}

/// The almost-sure upper bound on `min(R,S)`: `t* = ln 2 / θ₁₂`.
pub fn min_cutoff(params: &BnmoParams) -> f64 {
    std::f64::consts::LN_2 / params.theta12()
}

/// Survival function of `T = min(R,S)`: `P(T > t) = F̄(t,t)`, which is
/// `e^{-ct}(2e^{-θ₁₂t} - 1)` up to the cutoff and zero beyond it
/// (`c = θ₁ + θ₂`).
pub fn min_survival(params: &BnmoParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let c = params.theta1() + params.theta2();
    let bracket = 2.0 * (-params.theta12() * t).exp() - 1.0;
    Ok(if bracket <= 0.0 { 0.0 } else { (-c * t).exp() * bracket })
}

/// Rates entering the closed forms, oriented so `own` is the rate of the
/// coordinate named by `cause`.
fn oriented(params: &BnmoParams, cause: Cause) -> (f64, f64) {
    match cause {
        Cause::First => (params.theta1(), params.theta2()),
        Cause::Second => (params.theta2(), params.theta1()),
    }
}

/// Sub-density `f*(cause, t)` of `(T, J)` at `J = cause`:
/// `θ_own e^{-ct}(2e^{-θ₁₂t} - 1) + θ₁₂ e^{-(c+θ₁₂)t}` for `t ≤ t*`, zero
/// beyond. The singular component of the pair contributes an absolutely
/// continuous part here (the curve is parametrized by the failing
/// coordinate), so `T` has no atoms — only the jump of the density at `t*`.
pub fn cause_subdensity(params: &BnmoParams, cause: Cause, t: f64) -> Result<f64> {
    check_time(t)?;
    if t > min_cutoff(params) {
        return Ok(0.0);
    }
    let (own, _) = oriented(params, cause);
    let th12 = params.theta12();
    let c = params.theta1() + params.theta2();
    Ok(own * (-c * t).exp() * (2.0 * (-th12 * t).exp() - 1.0) + th12 * (-(c + th12) * t).exp())
}

/// Sub-distribution `F*(cause, t) = P(T ≤ t, J = cause)`:
/// `A(1 - e^{-(c+θ₁₂)t}) - B(1 - e^{-ct})` evaluated at `min(t, t*)`, with
/// `A = (2θ_own + θ₁₂)/(c + θ₁₂)` and `B = θ_own/c`.
pub fn cause_subdistribution(params: &BnmoParams, cause: Cause, t: f64) -> Result<f64> {
    check_time(t)?;
    let (own, _) = oriented(params, cause);
    let th12 = params.theta12();
    let c = params.theta1() + params.theta2();
    let tm = t.min(min_cutoff(params));
    let a = (2.0 * own + th12) / (c + th12);
    let b = own / c;
    Ok(-a * (-(c + th12) * tm).exp_m1() + b * (-c * tm).exp_m1())
}

/// Probability that the coordinate named by `cause` fails first.
///
/// Equals the sub-distribution at the cutoff. Writing `k = c/θ₁₂` and
/// `q = 2^{-k}`, the value collapses to `(A - B) - q(A/2 - B)`; this
/// arrangement makes the symmetric case `θ₁ = θ₂` return exactly 1/2 in
/// floating point (both parenthesized differences vanish or cancel
/// identically).
pub fn cause_probability(params: &BnmoParams, cause: Cause) -> f64 {
    let (own, _) = oriented(params, cause);
    let th12 = params.theta12();
    let c = params.theta1() + params.theta2();
    let a = (2.0 * own + th12) / (c + th12);
    let b = own / c;
    let q = (-(c / th12)).exp2();
    (a - b) - q * (0.5 * a - b)
}

/// `P(R < S)`: the first coordinate outlasts nothing — it fails first.
/// This is the reliability quantity of interest when `R` is a stress borne
/// by a component of strength `S`.
pub fn stress_strength(params: &BnmoParams) -> f64 {
    cause_probability(params, Cause::First)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}
