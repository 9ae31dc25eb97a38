//! Marshall–Olkin exponential shock models with negative dependence.
//!
//! The classical Marshall–Olkin construction kills two components with
//! individual shocks plus one *common* shock, which can only push the
//! lifetimes toward each other. This crate implements the complementary
//! family in which the common shock is replaced by an antithetically coupled
//! pair, producing genuinely negative dependence while keeping exponential
//! marginals, and bundles everything needed to work with it end to end:
//!
//! * [`model`] — parameters, support geometry, joint survival/CDF, the
//!   absolutely continuous density, and the singular component (curve,
//!   conditional jump, total mass).
//! * [`sampler`] — exact, reproducible simulation from seeded independent
//!   streams, for the bivariate model and its n-variate extension.
//! * [`dependence`] — Spearman/Kendall measures (quadrature and Monte Carlo),
//!   tail-dependence ladders, and a corner-dependence diagnostic.
//! * [`stress`] — competing-risk sub-densities, sub-distributions, and the
//!   stress-strength index P(R < S).
//! * [`estimation`] — constrained maximum likelihood with the
//!   continuous/singular partition, feasibility bound, profile search,
//!   bias/MSE study harness, and goodness-of-fit tests.
//! * [`multivariate`] — the n-dimensional survival function, its survival
//!   copula, and parameter I/O.
//! * [`numerics`] — the self-contained numerical kernels the rest sits on.
//!
//! All randomized routines take an explicit (seed, stream) pair and are
//! bit-reproducible across runs and thread counts.

pub mod data;
pub mod dependence;
pub mod error;
pub mod estimation;
pub mod model;
pub mod multivariate;
pub mod numerics;
pub mod sampler;
pub mod stress;

pub use error::{Error, Result};
pub use model::{BnmoParams, DepSign};
