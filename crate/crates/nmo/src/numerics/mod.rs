//! Self-contained numerical kernels: special functions, adaptive quadrature,
//! monotone root finding, and simplex minimization.
//!
//! Everything here is implemented in-repo so the model, dependence, and
//! estimation layers carry no external numerical dependencies whose upstream
//! behavior would have to be pinned.

mod quadrature;
mod roots;
mod simplex;
mod special;

pub use quadrature::{integrate_1d, integrate_2d, QuadratureConfig};
pub use roots::root_decreasing;
pub use simplex::{minimize_simplex, SimplexConfig, SimplexResult};
pub use special::{ln_gamma, log_beta};

/// Kahan-compensated accumulator.
///
/// Parallel reductions sum per-worker partials in worker order; compensation
/// keeps that reduction independent of how the scheduler interleaved the work.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    /// Fold another accumulator in (used to merge worker partials in order).
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum - self.comp
    }
}
