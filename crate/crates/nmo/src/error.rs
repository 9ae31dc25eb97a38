//! Crate-wide error type.

use crate::model::SupportRegion;

/// Errors produced by model evaluation, numerical routines, estimation, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated its domain constraint (rates must be positive and
    /// finite, shape parameters must lie in (0,1), and so on).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument lay outside the domain of the requested evaluation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A point was required to lie in the interior of the support but did not.
    /// `sum` is the classification statistic exp(-theta12*r) + exp(-theta12*s).
    #[error("point lies on the {region} of the support (classification sum {sum})")]
    OutsideInterior { region: SupportRegion, sum: f64 },

    /// Adaptive quadrature exhausted its subdivision budget before reaching
    /// the requested tolerance. Carries the best estimate obtained so far.
    #[error(
        "quadrature did not converge: estimated error {error:.3e} after {subdivisions} \
         subdivisions (best estimate {estimate:.12e})"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// A root-finding bracket did not satisfy f(lo) >= 0 >= f(hi).
    #[error("invalid root bracket: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The simplex objective evaluated to NaN. Infinite values are legitimate
    /// rejection sentinels; NaN always indicates a programming or data error.
    #[error("objective evaluated to NaN at {point:?}")]
    NonFiniteObjective { point: Vec<f64> },

    /// Every optimizer start diverged or the likelihood was -inf everywhere.
    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    /// A ratio estimate whose denominator is statistically indistinguishable
    /// from zero.
    #[error("ratio ill-conditioned: |tau| = {tau_abs:.3e} is below the floor {floor:.3e}")]
    IllConditionedRatio { tau_abs: f64, floor: f64 },

    /// Malformed CSV input; `line` is 1-based and counts the header.
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: u64, message: String },

    /// Malformed JSON parameter or result file.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Underlying file-system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
