//! Scalar root finding for monotone decreasing functions.

use crate::error::{Error, Result};

/// Root of a decreasing function on a bracket [lo, hi] with f(lo) >= 0 >= f(hi).
///
/// Bisection shrinks the bracket to `tol` (absolute width, also scaled by the
/// magnitude of the abscissa), then a few secant steps polish the estimate
/// without leaving the bracket. Equality at an endpoint short-circuits: if
/// f(lo) == 0 the result is `lo`, and likewise for `hi`.
pub fn root_decreasing<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!("root tolerance must be positive, got {tol}")));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Domain(format!("root bracket must be finite with lo < hi, got [{lo}, {hi}]")));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() || f_lo < 0.0 || f_hi > 0.0 {
        return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let mut a = lo;
    let mut b = hi;
    let mut fa = f_lo;
    let mut fb = f_hi;
    // 200 halvings exceed what any representable bracket can need.
    for _ in 0..200 {
        let width_tol = tol * 1.0_f64.max(a.abs().max(b.abs()));
        if b - a <= width_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::Domain(format!("root objective evaluated to NaN at {mid}")));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }

    // Secant polish, clamped to the surviving bracket.
    let mut x0 = a;
    let mut x1 = b;
    let mut f0 = fa;
    let mut f1 = fb;
    let mut best = if f0.abs() <= f1.abs() { x0 } else { x1 };
    let mut best_f = f0.abs().min(f1.abs());
    for _ in 0..8 {
        let denom = f1 - f0;
        if denom == 0.0 {
            break;
        }
        let mut x2 = x1 - f1 * (x1 - x0) / denom;
        if !(x2 > a && x2 < b) {
            x2 = 0.5 * (a + b);
        }
        let f2 = f(x2);
        if f2.is_nan() {
            break;
        }
        if f2.abs() < best_f {
            best = x2;
            best_f = f2.abs();
        }
        if f2 == 0.0 {
            return Ok(x2);
        }
        // Keep the bracket valid for the clamp above.
        if f2 > 0.0 {
            a = x2;
        } else {
            b = x2;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Ok(best)
}
