//! Maximum-likelihood fitting of the negatively coupled model.
//!
//! An observed pair either landed on the singular curve (the coupled
//! mechanism fired first on both coordinates) or in the interior of the
//! support. The likelihood treats the two groups differently, so fitting
//! starts from a partition of the rows. The coupling rate is constrained by
//! the data: every observation must stay inside the support
//! `e^{-θ₁₂r} + e^{-θ₁₂s} ≥ 1`, which caps θ₁₂ at a computable bound.
//!
//! The module provides the partition machinery, the log-likelihood and its
//! analytic score, a two-stage global search (profile over θ₁₂ with a
//! frozen-partition polish), a bias/MSE simulation harness, and
//! Kolmogorov–Smirnov checks for the marginal and joint fit.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{joint_cdf, log_density_continuous, singular_mass, BnmoParams, DepSign};
use crate::numerics::{minimize_simplex, root_decreasing, KahanSum, SimplexConfig};
use crate::sampler::{sample_dataset, RngStream};

/// Row indices split into the continuous group (size m1) and the singular
/// group (size m2), together covering every row exactly once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub continuous_rows: Vec<usize>,
    pub singular_rows: Vec<usize>,
    /// Boundary-identity tolerance used for unflagged rows.
    pub tolerance: f64,
}

impl Partition {
    pub fn m1(&self) -> usize {
        self.continuous_rows.len()
    }

    pub fn m2(&self) -> usize {
        self.singular_rows.len()
    }
}

/// Largest coupling rate that keeps every observation inside the closed
/// support: the minimum over rows of the positive root of
/// `e^{-θr} + e^{-θs} = 1`. Rows with a zero coordinate impose no
/// constraint; if no row constrains the rate the result is `+∞`.
pub fn theta12_feasible_max(data: &Dataset) -> Result<f64> {
    let mut bound = f64::INFINITY;
    for row in data.rows() {
        let lo = row.r.min(row.s);
        if lo == 0.0 {
            continue;
        }
        // The symmetric point θ = ln2/min(r,s) already has sum ≤ 1, so it
        // brackets the root from above.
        let hi = std::f64::consts::LN_2 / lo;
        let root = root_decreasing(
            |t| (-t * row.r).exp() + (-t * row.s).exp() - 1.0,
            0.0,
            hi,
            1e-13,
        )?;
        bound = bound.min(root);
    }
    Ok(bound)
}

/// Split rows into continuous and singular groups under the given coupling
/// rate. A pre-existing `is_singular` flag decides its row outright;
/// unflagged rows are singular when `|e^{-θ₁₂r} + e^{-θ₁₂s} - 1| ≤ tol`.
pub fn classify(data: &Dataset, theta12: f64, tol: f64) -> Result<Partition> {
    if !(theta12 > 0.0) || !theta12.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "classification rate must be positive and finite, got {theta12}"
        )));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "classification tolerance must be non-negative, got {tol}"
        )));
    }
    let mut continuous_rows = Vec::new();
    let mut singular_rows = Vec::new();
    for (i, row) in data.rows().iter().enumerate() {
        let singular = match row.is_singular {
            Some(flag) => flag,
            None => {
                ((-theta12 * row.r).exp() + (-theta12 * row.s).exp() - 1.0).abs() <= tol
            }
        };
        if singular {
            singular_rows.push(i);
        } else {
            continuous_rows.push(i);
        }
    }
    Ok(Partition { continuous_rows, singular_rows, tolerance: tol })
}

/// Log-likelihood of the partitioned sample:
///
/// * continuous rows contribute `-θ₁r - θ₂s + ln Δ` (the log of the
///   absolutely continuous density);
/// * singular rows contribute `m₂·ln(θ₁₂/(θ₁+θ₁₂))` plus
///   `(θ₂/θ₁₂)·Σ ln(1 - e^{-θ₁₂rⱼ})`.
///
/// Parameters that push any continuous row onto or outside the support
/// boundary get `-∞` rather than an error, so optimizers can probe freely.
/// The partition must have been built for `data`.
pub fn log_likelihood(p: &BnmoParams, data: &Dataset, part: &Partition) -> f64 {
    let rows = data.rows();
    let mut total = 0.0;
    for &i in &part.continuous_rows {
        match log_density_continuous(p, rows[i].r, rows[i].s) {
            Ok(v) => total += v,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    let m2 = part.singular_rows.len();
    if m2 > 0 {
        total += m2 as f64 * (p.theta12() / p.rate_r()).ln();
        let mut sum_ln = 0.0;
        for &i in &part.singular_rows {
            // ln(1 - e^{-θ₁₂ r}) without forming the subtraction.
            let term = (-(-p.theta12() * rows[i].r).exp_m1()).ln();
            if !term.is_finite() {
                return f64::NEG_INFINITY;
            }
            sum_ln += term;
        }
        total += p.theta2() / p.theta12() * sum_ln;
    }
    total
}

/// Analytic gradient of [`log_likelihood`] in `(θ₁, θ₂, θ₁₂)`.
///
/// With `Δⱼ = θ₂(θ₁+θ₁₂)e^{-θ₁₂rⱼ} + θ₁(θ₂+θ₁₂)e^{-θ₁₂sⱼ} - θ₁θ₂` over the
/// continuous rows and `Lⱼ = ln(1-e^{-θ₁₂rⱼ})` over the singular rows:
///
/// * `∂l/∂θ₁ = -Σrⱼ + Σ(θ₂e^{-θ₁₂rⱼ} + (θ₂+θ₁₂)e^{-θ₁₂sⱼ} - θ₂)/Δⱼ - m₂/(θ₁+θ₁₂)`
/// * `∂l/∂θ₂ = -Σsⱼ + Σ((θ₁+θ₁₂)e^{-θ₁₂rⱼ} + θ₁e^{-θ₁₂sⱼ} - θ₁)/Δⱼ + (1/θ₁₂)ΣLⱼ`
/// * `∂l/∂θ₁₂ = Σ(θ₂e^{-θ₁₂rⱼ}(1-(θ₁+θ₁₂)rⱼ) + θ₁e^{-θ₁₂sⱼ}(1-(θ₂+θ₁₂)sⱼ))/Δⱼ`
///   `+ m₂/θ₁₂ - m₂/(θ₁+θ₁₂) - (θ₂/θ₁₂²)ΣLⱼ + (θ₂/θ₁₂)Σ rⱼe^{-θ₁₂rⱼ}/(1-e^{-θ₁₂rⱼ})`
///
/// Unlike the likelihood, infeasible parameters are an error here: a
/// gradient at a `-∞` point is meaningless.
pub fn score(p: &BnmoParams, data: &Dataset, part: &Partition) -> Result<[f64; 3]> {
    let rows = data.rows();
    let (th1, th2, th12) = (p.theta1(), p.theta2(), p.theta12());
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    let mut d12 = 0.0;
    for &i in &part.continuous_rows {
        let (r, s) = (rows[i].r, rows[i].s);
        log_density_continuous(p, r, s)?;
        let er = (-th12 * r).exp();
        let es = (-th12 * s).exp();
        let delta = th2 * (th1 + th12) * er + th1 * (th2 + th12) * es - th1 * th2;
        d1 += -r + (th2 * er + (th2 + th12) * es - th2) / delta;
        d2 += -s + ((th1 + th12) * er + th1 * es - th1) / delta;
        d12 += (th2 * er * (1.0 - (th1 + th12) * r) + th1 * es * (1.0 - (th2 + th12) * s))
            / delta;
    }
    let m2 = part.singular_rows.len() as f64;
    if m2 > 0.0 {
        let mut sum_ln = 0.0;
        let mut sum_ratio = 0.0;
        for &i in &part.singular_rows {
            let r = rows[i].r;
            let one_minus = -(-th12 * r).exp_m1();
            if one_minus <= 0.0 {
                return Err(Error::Domain(format!(
                    "singular row with r = {r} has no boundary contribution"
                )));
            }
            sum_ln += one_minus.ln();
            sum_ratio += r * (-th12 * r).exp() / one_minus;
        }
        d1 -= m2 / (th1 + th12);
        d2 += sum_ln / th12;
        d12 += m2 / th12 - m2 / (th1 + th12) - th2 / (th12 * th12) * sum_ln
            + th2 / th12 * sum_ratio;
    }
    Ok([d1, d2, d12])
}

/// Controls for [`fit_mle`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// `(θ₁, θ₂)` starts per θ₁₂ grid point; the first three are
    /// moment-informed, further ones are randomized.
    pub n_starts: usize,
    /// θ₁₂ grid points in the first stage (log-spaced up to the bound).
    pub grid_size: usize,
    /// Boundary-identity tolerance for classifying unflagged rows.
    pub tol: f64,
    /// Seed for the randomized extra starts.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { n_starts: 3, grid_size: 24, tol: 1e-9, seed: 0x5eed }
    }
}

/// Outcome of [`fit_mle`].
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub theta_hat: BnmoParams,
    pub log_likelihood: f64,
    pub m1: usize,
    pub m2: usize,
    /// Total first-stage starts attempted.
    pub n_starts: usize,
    /// Whether the polish stage stopped on its tolerance test (rather than
    /// the iteration budget).
    pub converged: bool,
    /// The `(θ₁, θ₂, θ₁₂)` start that led to the winning first-stage point.
    pub best_start: [f64; 3],
    /// Feasibility cap on θ₁₂ computed from the data (`+∞` if unconstrained;
    /// serializes as null).
    pub theta12_upper_bound: f64,
}

fn stage1_simplex() -> SimplexConfig {
    SimplexConfig { max_iterations: 300, x_tol: 1e-7, f_tol: 1e-10, ..Default::default() }
}

fn stage2_simplex() -> SimplexConfig {
    SimplexConfig { max_iterations: 1500, x_tol: 1e-9, f_tol: 1e-12, ..Default::default() }
}

struct Stage1Best {
    ll: f64,
    theta1: f64,
    theta2: f64,
    theta12: f64,
    partition: Partition,
    start: [f64; 3],
}

/// Maximum-likelihood fit. See [`fit_mle`]; additionally returns the best
/// first-stage log-likelihood so the monotone-improvement property of the
/// polish stage can be observed.
pub(crate) fn fit_stages(data: &Dataset, cfg: &FitConfig) -> Result<(FitResult, f64)> {
    if cfg.n_starts == 0 {
        return Err(Error::InvalidParameter("need at least one start per grid point".into()));
    }
    if cfg.grid_size < 2 {
        return Err(Error::InvalidParameter("coupling grid needs at least 2 points".into()));
    }
    if !(cfg.tol >= 0.0) || !cfg.tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "classification tolerance must be non-negative, got {}",
            cfg.tol
        )));
    }
    let m = data.len();
    let mean_r = data.rows().iter().map(|w| w.r).sum::<f64>() / m as f64;
    let mean_s = data.rows().iter().map(|w| w.s).sum::<f64>() / m as f64;
    if mean_r <= 0.0 || mean_s <= 0.0 {
        return Err(Error::Domain("a coordinate column is identically zero".into()));
    }
    // Exponential marginals: θ₁+θ₁₂ ≈ 1/mean(r), θ₂+θ₁₂ ≈ 1/mean(s).
    let rate_r0 = 1.0 / mean_r;
    let rate_s0 = 1.0 / mean_s;
    let scale = rate_r0.min(rate_s0);

    let bound = theta12_feasible_max(data)?;
    let upper = if bound.is_finite() { bound * (1.0 - 1e-6) } else { 100.0 * scale };
    let lower = upper * 1e-3;
    let mut grid: Vec<f64> = (0..cfg.grid_size)
        .map(|k| lower * (upper / lower).powf(k as f64 / (cfg.grid_size - 1) as f64))
        .collect();

    // When flags identify the singular rows, add a θ₁₂ start that matches
    // the observed singular fraction to the model's singular mass, holding
    // the moment-implied marginal rates fixed.
    let m2_flagged = data.rows().iter().filter(|w| w.is_singular == Some(true)).count();
    if m2_flagged > 0 {
        let target = m2_flagged as f64 / m as f64;
        let mass_gap = |t: f64| -> f64 {
            let th1 = (rate_r0 - t).max(1e-12 * rate_r0);
            let th2 = (rate_s0 - t).max(1e-12 * rate_s0);
            match BnmoParams::new(th1, th2, t).and_then(|p| singular_mass(&p)) {
                Ok(mass) => target - mass,
                Err(_) => f64::NAN,
            }
        };
        if let Ok(matched) =
            root_decreasing(mass_gap, 1e-6 * scale, scale * (1.0 - 1e-9), 1e-10)
        {
            grid.push(matched.min(upper));
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    // Start multipliers: identity, lopsided both ways, then randomized.
    let mut multipliers: Vec<(f64, f64)> = vec![(1.0, 1.0), (2.0, 0.5), (0.5, 2.0)];
    if cfg.n_starts < multipliers.len() {
        multipliers.truncate(cfg.n_starts);
    } else if cfg.n_starts > multipliers.len() {
        let mut rng = RngStream::new(cfg.seed, 0x57a7);
        for _ in multipliers.len()..cfg.n_starts {
            let a = 4.0f64.powf(2.0 * rng.uniform_open() - 1.0);
            let b = 4.0f64.powf(2.0 * rng.uniform_open() - 1.0);
            multipliers.push((a, b));
        }
    }

    let mut best: Option<Stage1Best> = None;
    let mut attempts = 0usize;
    let mut infeasible = 0usize;
    let s1 = stage1_simplex();
    for &t12 in &grid {
        let part = classify(data, t12, cfg.tol)?;
        for &(mul_r, mul_s) in &multipliers {
            attempts += 1;
            let th1_0 = (rate_r0 - t12).max(0.05 * rate_r0) * mul_r;
            let th2_0 = (rate_s0 - t12).max(0.05 * rate_s0) * mul_s;
            let objective = |z: &[f64]| match BnmoParams::new(z[0].exp(), z[1].exp(), t12) {
                Ok(p) => -log_likelihood(&p, data, &part),
                Err(_) => f64::INFINITY,
            };
            match minimize_simplex(objective, &[th1_0.ln(), th2_0.ln()], &s1) {
                Ok(res) => {
                    let ll = -res.value;
                    if best.as_ref().is_none_or(|b| ll > b.ll) {
                        best = Some(Stage1Best {
                            ll,
                            theta1: res.point[0].exp(),
                            theta2: res.point[1].exp(),
                            theta12: t12,
                            partition: part.clone(),
                            start: [th1_0, th2_0, t12],
                        });
                    }
                }
                Err(_) => infeasible += 1,
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::NonConvergence(format!(
            "all {attempts} first-stage starts failed ({infeasible} infeasible) across {} \
             coupling grid points; feasibility bound {bound:.6e}",
            grid.len()
        ))
    })?;

    // Polish: freeze the winning partition and search all three log-rates,
    // with a smooth barrier keeping θ₁₂ strictly below the feasibility wall.
    let part = best.partition;
    let mu = 1e-12 * (1.0 + best.ll.abs());
    let objective2 = |z: &[f64]| {
        let t12 = z[2].exp();
        if t12 >= bound {
            return f64::INFINITY;
        }
        let penalty = if bound.is_finite() { mu * bound / (bound - t12) } else { 0.0 };
        match BnmoParams::new(z[0].exp(), z[1].exp(), t12) {
            Ok(p) => -log_likelihood(&p, data, &part) + penalty,
            Err(_) => f64::INFINITY,
        }
    };
    let start2 = [best.theta1.ln(), best.theta2.ln(), best.theta12.ln()];
    let res2 = minimize_simplex(objective2, &start2, &stage2_simplex())?;
    let polished = BnmoParams::new(
        res2.point[0].exp(),
        res2.point[1].exp(),
        res2.point[2].exp(),
    )?;
    let ll_polished = log_likelihood(&polished, data, &part);
    // The polish can only be preferred when it genuinely improves the
    // unpenalized likelihood; otherwise keep the grid winner.
    let (theta_hat, ll_final) = if ll_polished >= best.ll {
        (polished, ll_polished)
    } else {
        (BnmoParams::new(best.theta1, best.theta2, best.theta12)?, best.ll)
    };

    let fit = FitResult {
        theta_hat,
        log_likelihood: ll_final,
        m1: part.continuous_rows.len(),
        m2: part.singular_rows.len(),
        n_starts: attempts,
        converged: res2.converged,
        best_start: best.start,
        theta12_upper_bound: bound,
    };
    Ok((fit, best.ll))
}

/// Global maximum-likelihood fit by a two-stage search.
///
/// Stage 1 profiles over a log-spaced θ₁₂ grid capped at the feasibility
/// bound: each grid point classifies the rows (the partition can change
/// with θ₁₂ for unflagged data, making the raw objective discontinuous),
/// then maximizes over `(θ₁, θ₂)` in log coordinates from moment-informed
/// starts. Stage 2 freezes the best partition and polishes all three
/// parameters jointly. Positivity is enforced by the log reparameterization
/// throughout.
pub fn fit_mle(data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    fit_stages(data, cfg).map(|(fit, _)| fit)
}

/// One sample-size row of a bias/MSE table.
#[derive(Debug, Clone, Serialize)]
pub struct StudyCell {
    pub m: usize,
    /// Mean error of `(θ̂₁, θ̂₂, θ̂₁₂)` across replications.
    pub bias: [f64; 3],
    /// Mean squared error of the same.
    pub mse: [f64; 3],
    pub replications_used: usize,
    pub failures: usize,
}

/// Repeated-sampling study of the estimator: for each sample size, draw
/// `replications` datasets from `true_p`, fit each, and tabulate bias and
/// MSE per parameter. Replication `k` of size index `i` uses RNG stream
/// `i·2³² + k`, and failures are excluded (and counted) rather than
/// aborting the table. Replications run on `workers` threads; the reduction
/// is in replication order, so results do not depend on the worker count.
pub fn bias_mse_study(
    true_p: &BnmoParams,
    sign: DepSign,
    sample_sizes: &[usize],
    replications: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<StudyCell>> {
    if replications == 0 {
        return Err(Error::Domain("study needs at least one replication".into()));
    }
    if sample_sizes.is_empty() || sample_sizes.contains(&0) {
        return Err(Error::Domain("study sample sizes must be positive".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidParameter("worker count must be at least 1".into()));
    }
    let pool = if workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::NonConvergence(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let cfg = FitConfig::default();
    let truth = [true_p.theta1(), true_p.theta2(), true_p.theta12()];
    let mut table = Vec::with_capacity(sample_sizes.len());
    for (size_idx, &m) in sample_sizes.iter().enumerate() {
        let run_one = |rep: usize| -> Option<[f64; 3]> {
            let stream = ((size_idx as u64) << 32) | rep as u64;
            let data = sample_dataset(true_p, sign, m, seed, stream).ok()?;
            let fit = fit_mle(&data, &cfg).ok()?;
            Some([
                fit.theta_hat.theta1(),
                fit.theta_hat.theta2(),
                fit.theta_hat.theta12(),
            ])
        };
        let estimates: Vec<Option<[f64; 3]>> = match &pool {
            Some(pool) => {
                pool.install(|| (0..replications).into_par_iter().map(run_one).collect())
            }
            None => (0..replications).map(run_one).collect(),
        };
        let mut bias_sum = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
        let mut mse_sum = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
        let mut used = 0usize;
        let mut failures = 0usize;
        for est in estimates {
            match est {
                Some(t) => {
                    for k in 0..3 {
                        let d = t[k] - truth[k];
                        bias_sum[k].add(d);
                        mse_sum[k].add(d * d);
                    }
                    used += 1;
                }
                None => failures += 1,
            }
        }
        if used == 0 {
            return Err(Error::NonConvergence(format!(
                "every replication failed to fit at sample size {m}"
            )));
        }
        let nf = used as f64;
        table.push(StudyCell {
            m,
            bias: [
                bias_sum[0].value() / nf,
                bias_sum[1].value() / nf,
                bias_sum[2].value() / nf,
            ],
            mse: [
                mse_sum[0].value() / nf,
                mse_sum[1].value() / nf,
                mse_sum[2].value() / nf,
            ],
            replications_used: used,
            failures,
        });
    }
    Ok(table)
}

/// Upper tail `Q(z) = P(K > z)` of the Kolmogorov distribution, by the
/// standard piecewise evaluation: below z = 0.755 the Jacobi-theta form
/// `1 - (√(2π)/z)·Σ exp(-(2j-1)²π²/(8z²))`, above it the alternating series
/// `2·Σ (-1)^{j-1} exp(-2j²z²)`, each truncated where further terms fall
/// below double precision.
pub fn kolmogorov_tail(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= 0.2 {
        // F(0.2) < 1e-12, so the tail is 1 at double precision.
        return 1.0;
    }
    if z < 0.755 {
        let v = 1.0 / (z * z);
        let k = std::f64::consts::PI * std::f64::consts::PI / 8.0 * v;
        let cdf = (std::f64::consts::TAU.sqrt() / z)
            * ((-k).exp() + (-9.0 * k).exp() + (-25.0 * k).exp());
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    if z < 6.8116 {
        let u = (-2.0 * z * z).exp();
        return (2.0 * (u - u.powi(4) + u.powi(9) - u.powi(16))).clamp(0.0, 1.0);
    }
    0.0
}

/// One-sample Kolmogorov–Smirnov report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

fn ks_statistic_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    d
}

fn checked_marginal_column(column: &[f64]) -> Result<Vec<f64>> {
    if column.len() < 5 {
        return Err(Error::Domain(format!(
            "marginal test needs at least 5 observations, got {}",
            column.len()
        )));
    }
    for &x in column {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!(
                "marginal observations must be non-negative and finite, got {x}"
            )));
        }
    }
    let mut xs = column.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(xs)
}

/// Kolmogorov–Smirnov test of a column against the exponential distribution
/// with the given (a-priori) rate. The p-value uses the asymptotic
/// Kolmogorov tail at `z = √n·D`; it is conservative when the rate was
/// estimated from the same data — use [`ks_marginal_estimated`] there.
pub fn ks_marginal(column: &[f64], rate: f64) -> Result<KsTest> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!("rate must be positive and finite, got {rate}")));
    }
    let xs = checked_marginal_column(column)?;
    let statistic = ks_statistic_sorted(&xs, |x| -(-rate * x).exp_m1());
    let z = (xs.len() as f64).sqrt() * statistic;
    Ok(KsTest { statistic, p_value: kolmogorov_tail(z), n: xs.len() })
}

/// Kolmogorov–Smirnov test against an exponential whose rate is estimated
/// from the column itself (rate = 1/mean). The p-value comes from a
/// parametric bootstrap that re-estimates the rate in every replicate,
/// which accounts for the estimation step the asymptotic tail ignores.
pub fn ks_marginal_estimated(column: &[f64], replicates: usize, seed: u64) -> Result<KsTest> {
    if replicates < 100 {
        return Err(Error::Domain(format!(
            "rate-estimated bootstrap needs at least 100 replicates, got {replicates}"
        )));
    }
    let xs = checked_marginal_column(column)?;
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return Err(Error::Domain("column is identically zero".into()));
    }
    let rate_hat = 1.0 / mean;
    let d_obs = ks_statistic_sorted(&xs, |x| -(-rate_hat * x).exp_m1());
    let mut at_least = 0usize;
    for rep in 0..replicates {
        let mut rng = RngStream::new(seed, rep as u64);
        let mut ys: Vec<f64> = (0..n).map(|_| rng.exponential(rate_hat)).collect();
        let mean_b = ys.iter().sum::<f64>() / n as f64;
        let rate_b = 1.0 / mean_b;
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ks_statistic_sorted(&ys, |x| -(-rate_b * x).exp_m1()) >= d_obs {
            at_least += 1;
        }
    }
    Ok(KsTest {
        statistic: d_obs,
        p_value: (1 + at_least) as f64 / (replicates + 1) as f64,
        n,
    })
}

/// Joint goodness-of-fit report from [`gof_joint_bootstrap`].
#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    /// Sup over observed points of |empirical joint CDF − model joint CDF|.
    pub statistic: f64,
    /// `None` when more than 20% of bootstrap refits failed.
    pub p_value: Option<f64>,
    pub replicates: usize,
    pub replicates_used: usize,
    pub refit_failures: usize,
}

fn joint_ks_statistic(data: &Dataset, p: &BnmoParams) -> Result<f64> {
    let rows = data.rows();
    let m = rows.len() as f64;
    let mut d = 0.0f64;
    for a in rows {
        let emp = rows.iter().filter(|b| b.r <= a.r && b.s <= a.s).count() as f64 / m;
        let model = joint_cdf(p, DepSign::Negative, a.r, a.s)?;
        d = d.max((emp - model).abs());
    }
    Ok(d)
}

/// Parametric-bootstrap joint goodness-of-fit test.
///
/// The statistic compares the empirical joint CDF with the fitted model's
/// CDF at every observed point. Its null distribution is estimated by
/// simulating `replicates` datasets from the fitted parameters, refitting
/// each (so the p-value accounts for estimation), and recomputing the
/// statistic. Replicate flags mirror the input: flagged data stays flagged,
/// unflagged data is refit blind. Refit failures are excluded and counted;
/// if more than 20% fail the p-value is withheld.
pub fn gof_joint_bootstrap(
    data: &Dataset,
    fitted: &FitResult,
    cfg: &FitConfig,
    replicates: usize,
    seed: u64,
    workers: usize,
) -> Result<GofReport> {
    if replicates < 200 {
        return Err(Error::Domain(format!(
            "joint bootstrap needs at least 200 replicates, got {replicates}"
        )));
    }
    if workers == 0 {
        return Err(Error::InvalidParameter("worker count must be at least 1".into()));
    }
    let d_obs = joint_ks_statistic(data, &fitted.theta_hat)?;
    let m = data.len();
    let keep_flags = data.has_flags();
    let run_one = |rep: usize| -> Option<f64> {
        let sim = sample_dataset(&fitted.theta_hat, DepSign::Negative, m, seed, rep as u64)
            .ok()?;
        let sim = if keep_flags { sim } else { sim.without_flags() };
        let refit = fit_mle(&sim, cfg).ok()?;
        joint_ks_statistic(&sim, &refit.theta_hat).ok()
    };
    let draws: Vec<Option<f64>> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::NonConvergence(format!("thread pool: {e}")))?;
        pool.install(|| (0..replicates).into_par_iter().map(run_one).collect())
    } else {
        (0..replicates).map(run_one).collect()
    };
    let mut used = 0usize;
    let mut failures = 0usize;
    let mut at_least = 0usize;
    for d in draws {
        match d {
            Some(v) => {
                used += 1;
                if v >= d_obs {
                    at_least += 1;
                }
            }
            None => failures += 1,
        }
    }
    let p_value = if failures * 5 > replicates {
        None
    } else {
        Some((1 + at_least) as f64 / (used + 1) as f64)
    };
    Ok(GofReport {
        statistic: d_obs,
        p_value,
        replicates,
        replicates_used: used,
        refit_failures: failures,
    })
}
