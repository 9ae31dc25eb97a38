//! Nelder–Mead simplex minimization.
//!
//! Deterministic given the start point: the initial simplex is built from
//! fixed relative coordinate steps and every update (reflection, expansion,
//! contraction, shrink) follows the classical coefficient scheme. Objectives
//! may return `+inf` to reject a region — the search contracts away from such
//! points — but `NaN` is treated as an error identifying the offending point.
//! Multi-start strategies belong to callers; this routine runs exactly one
//! descent.

use crate::error::{Error, Result};

/// Coefficients, tolerances, and budget for one Nelder–Mead descent.
#[derive(Debug, Clone, Copy)]
pub struct SimplexConfig {
    /// Reflection coefficient, > 0.
    pub reflection: f64,
    /// Expansion coefficient, > 1.
    pub expansion: f64,
    /// Contraction coefficient, in (0, 1).
    pub contraction: f64,
    /// Shrink coefficient, in (0, 1).
    pub shrink: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the simplex diameter (infinity norm).
    pub x_tol: f64,
    /// Convergence threshold on the spread of objective values.
    pub f_tol: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_iterations: 2000,
            x_tol: 1e-9,
            f_tol: 1e-11,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reflection > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reflection coefficient must be positive, got {}",
                self.reflection
            )));
        }
        if !(self.expansion > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "expansion coefficient must exceed 1, got {}",
                self.expansion
            )));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "contraction coefficient must lie in (0,1), got {}",
                self.contraction
            )));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrink coefficient must lie in (0,1), got {}",
                self.shrink
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.x_tol > 0.0) || !(self.f_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "simplex tolerances must be positive, got x_tol {} f_tol {}",
                self.x_tol, self.f_tol
            )));
        }
        Ok(())
    }
}

/// Outcome of one descent: best vertex, its value, and whether the tolerance
/// test (rather than the iteration budget) stopped the search.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `f` from `start` with the Nelder–Mead simplex.
///
/// The start must evaluate to a finite value; the best value never rises above
/// `f(start)` because the best vertex is only ever replaced by a better one.
pub fn minimize_simplex<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    cfg: &SimplexConfig,
) -> Result<SimplexResult> {
    cfg.validate()?;
    let n = start.len();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot minimize over zero dimensions".into()));
    }

    let eval = |x: &[f64], f: &mut F| -> Result<f64> {
        let v = f(x);
        if v.is_nan() {
            return Err(Error::NonFiniteObjective { point: x.to_vec() });
        }
        Ok(v)
    };

    let f0 = eval(start, &mut f)?;
    if !f0.is_finite() {
        return Err(Error::Domain(format!(
            "simplex start must have a finite objective, got {f0} at {start:?}"
        )));
    }

    // Initial simplex: start plus one vertex per coordinate, displaced by a
    // 5% relative step (absolute step for zero coordinates).
    let mut verts: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    verts.push((f0, start.to_vec()));
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += if v[i] != 0.0 { 0.05 * v[i].abs() } else { 2.5e-4 };
        let fv = eval(&v, &mut f)?;
        verts.push((fv, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        verts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

        // Convergence: simplex collapsed in both x and f.
        let (f_best, best) = (&verts[0].0, &verts[0].1);
        let f_worst = verts[n].0;
        let x_spread = verts[1..]
            .iter()
            .flat_map(|(_, v)| v.iter().zip(best.iter()).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        let f_spread = if f_worst.is_finite() { f_worst - f_best } else { f64::INFINITY };
        if x_spread <= cfg.x_tol && f_spread <= cfg.f_tol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (_, v) in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v.iter()) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let worst = verts[n].1.clone();
        let f_second_worst = verts[n - 1].0;
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(worst.iter())
            .map(|(c, w)| c + cfg.reflection * (c - w))
            .collect();
        let f_reflect = eval(&reflect, &mut f)?;

        if f_reflect < verts[0].0 {
            // Try to expand past the reflected point.
            let expand: Vec<f64> = centroid
                .iter()
                .zip(worst.iter())
                .map(|(c, w)| c + cfg.expansion * cfg.reflection * (c - w))
                .collect();
            let f_expand = eval(&expand, &mut f)?;
            verts[n] = if f_expand < f_reflect { (f_expand, expand) } else { (f_reflect, reflect) };
            continue;
        }
        if f_reflect < f_second_worst {
            verts[n] = (f_reflect, reflect);
            continue;
        }

        // Contract: outside if the reflection improved on the worst, else inside.
        let contracted: Vec<f64> = if f_reflect < verts[n].0 {
            centroid
                .iter()
                .zip(reflect.iter())
                .map(|(c, r)| c + cfg.contraction * (r - c))
                .collect()
        } else {
            centroid
                .iter()
                .zip(worst.iter())
                .map(|(c, w)| c + cfg.contraction * (w - c))
                .collect()
        };
        let f_contracted = eval(&contracted, &mut f)?;
        if f_contracted < verts[n].0.min(f_reflect) {
            verts[n] = (f_contracted, contracted);
            continue;
        }

        // Shrink everything toward the best vertex.
        let best = verts[0].1.clone();
        for (fv, v) in verts.iter_mut().skip(1) {
            for (x, b) in v.iter_mut().zip(best.iter()) {
                *x = b + cfg.shrink * (*x - b);
            }
            *fv = eval(v, &mut f)?;
        }
    }

    verts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SimplexResult {
        point: verts[0].1.clone(),
        value: verts[0].0,
        iterations,
        converged,
    })
}
