//! Acceptance gate: ten end-to-end checks of the library's core claims, each
//! printing a single PASS/FAIL line (visible under `--nocapture`). Every
//! check carries its tolerance and wall-clock budget inline.

use std::time::Instant;

use nmo::data::{summarize, Dataset};
use nmo::dependence::{
    empirical_measures, kendall_tau, rcsd_diagnostic, rho_tau_ratio, tail_dependence, McConfig,
    RhoTauOptions,
};
use nmo::estimation::{
    bias_mse_study, classify, fit_mle, gof_joint_bootstrap, ks_marginal, log_likelihood, score,
    FitConfig,
};
use nmo::model::{singular_mass, DepSign};
use nmo::multivariate::{
    gammas_from_params, mnmo_survival, sample_mnmo_dataset, survival_copula, MnmoParams,
    PairUniformMode,
};
use nmo::numerics::{integrate_1d, integrate_2d, log_beta, QuadratureConfig};
use nmo::sampler::{sample_dataset, RngStream};
use nmo::stress::{cause_probability, stress_strength, Cause};
use nmo::BnmoParams;

struct Criterion {
    number: usize,
    label: &'static str,
    budget_seconds: f64,
    started: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn new(number: usize, label: &'static str, budget_seconds: f64) -> Self {
        Self { number, label, budget_seconds, started: Instant::now(), failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if elapsed >= self.budget_seconds {
            self.failures.push(format!(
                "runtime {elapsed:.1}s exceeded the {:.0}s budget",
                self.budget_seconds
            ));
        }
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:02} ({}): {verdict} [{elapsed:.1}s]",
            self.number, self.label
        );
        assert!(
            self.failures.is_empty(),
            "criterion {:02} failed: {}",
            self.number,
            self.failures.join(" | ")
        );
    }
}

fn binomial_band(p: f64, n: usize, sigmas: f64) -> f64 {
    sigmas * (p * (1.0 - p) / n as f64).sqrt()
}

fn singular_frequency(params: &BnmoParams, m: usize, seed: u64) -> f64 {
    let data = sample_dataset(params, DepSign::Negative, m, seed, 0).unwrap();
    let flagged = data
        .rows()
        .iter()
        .filter(|row| row.is_singular == Some(true))
        .count();
    flagged as f64 / m as f64
}

#[test]
fn criterion_01_singular_mass() {
    let mut c = Criterion::new(1, "singular-flag frequency matches the Beta mass", 30.0);

    // Symmetric point: the curve carries B(2,2) = 1/6 exactly.
    let p = BnmoParams::new(1.0, 1.0, 1.0).unwrap();
    let freq = singular_frequency(&p, 1_000_000, 0xACC1);
    let band = binomial_band(1.0 / 6.0, 1_000_000, 3.0);
    c.check(
        (freq - 1.0 / 6.0).abs() <= band,
        || format!("symmetric frequency {freq:.6} outside 1/6 ± {band:.6}"),
    );

    // Asymmetric points: frequency matches exp(log B(1/alpha, 1/beta)).
    for (k, (t1, t2, t12)) in [
        (1.0, 3.0, 0.8),
        (2.0, 1.0, 1.5),
        (0.5, 2.0, 1.0),
        (1.0, 2.0, 1.2),
        (3.0, 0.7, 2.0),
    ]
    .into_iter()
    .enumerate()
    {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let mass = (log_beta(1.0 / p.alpha(), 1.0 / p.beta()).unwrap()).exp();
        let internal = singular_mass(&p).unwrap();
        c.check(
            (mass - internal).abs() <= 1e-12 * mass,
            || format!("point {k}: Beta evaluations disagree ({mass} vs {internal})"),
        );
        let m = 200_000;
        let freq = singular_frequency(&p, m, 0xACC2 + k as u64);
        let band = binomial_band(mass, m, 3.0);
        c.check(
            (freq - mass).abs() <= band,
            || format!("point {k} ({t1},{t2},{t12}): frequency {freq:.5} vs mass {mass:.5} ± {band:.5}"),
        );
    }

    c.finish();
}

#[test]
fn criterion_02_total_mass() {
    let mut c = Criterion::new(2, "continuous quadrature + singular mass = 1", 10.0);
    let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-8, max_subdivisions: 60_000 };
    for (t1, t2, t12) in [(1.0, 1.0, 1.0), (1.0, 3.0, 0.8), (2.0, 0.5, 1.5)] {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        // Substitute u = e^{-t12 r}, v = e^{-t12 s}, then map the triangle
        // {u + v > 1} onto the unit square; the transformed density is
        // smooth, so the quadrature converges cleanly.
        let ac = integrate_2d(
            |a: f64, t: f64| {
                let u = 1.0 - a * t;
                let v = 1.0 - (1.0 - a) * t;
                if u <= 0.0 || v <= 0.0 || u + v <= 1.0 {
                    return 0.0;
                }
                let r = -u.ln() / t12;
                let s = -v.ln() / t12;
                match nmo::model::density_continuous(&p, r, s) {
                    Ok(f) => f * t / (t12 * t12 * u * v),
                    Err(_) => 0.0,
                }
            },
            (0.0, 1.0),
            (0.0, 1.0),
            &cfg,
        )
        .unwrap();
        let total = ac + singular_mass(&p).unwrap();
        c.check(
            (total - 1.0).abs() <= 1e-6,
            || format!("({t1},{t2},{t12}): total mass {total:.9}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_03_jump_mass_identity() {
    let mut c = Criterion::new(3, "jump integral reproduces the Beta mass", 5.0);
    let cfg = QuadratureConfig { abs_tol: 1e-12, rel_tol: 1e-11, max_subdivisions: 5000 };
    for (t1, t2, t12) in [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (0.5, 3.0, 1.25)] {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let rate = p.theta1() + p.theta12();
        let integral = integrate_1d(
            |r| {
                if r <= 0.0 {
                    return 0.0;
                }
                nmo::model::singular_jump(&p, r).unwrap() * rate * (-rate * r).exp()
            },
            0.0,
            f64::INFINITY,
            &cfg,
        )
        .unwrap();
        let mass = singular_mass(&p).unwrap();
        c.check(
            (integral - mass).abs() <= 1e-8,
            || format!("({t1},{t2},{t12}): integral {integral:.12} vs mass {mass:.12}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_04_stress_strength() {
    let mut c = Criterion::new(4, "stress-strength closed form", 30.0);

    // Closed form versus Monte Carlo frequency of {R < S} at five points.
    for (k, (t1, t2, t12)) in [
        (1.0, 3.0, 0.8),
        (2.0, 1.0, 1.5),
        (1.0, 2.0, 1.0),
        (0.5, 0.5, 2.0),
        (3.0, 0.7, 1.2),
    ]
    .into_iter()
    .enumerate()
    {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let closed = stress_strength(&p);
        let m = 200_000;
        let data = sample_dataset(&p, DepSign::Negative, m, 0xACC4 + k as u64, 0).unwrap();
        let freq = data.rows().iter().filter(|row| row.r < row.s).count() as f64 / m as f64;
        let band = binomial_band(closed, m, 3.0);
        c.check(
            (freq - closed).abs() <= band,
            || format!("point {k} ({t1},{t2},{t12}): MC {freq:.5} vs closed {closed:.5} ± {band:.5}"),
        );
    }

    // Equal idiosyncratic rates give exactly one half, bit for bit.
    for (t1, t12) in [(1.0, 1.0), (1.7, 0.9), (0.3, 2.5)] {
        let p = BnmoParams::new(t1, t1, t12).unwrap();
        let v = stress_strength(&p);
        c.check(v == 0.5, || format!("symmetric ({t1},{t1},{t12}): {v} != 0.5"));
    }

    // The two cause probabilities exhaust the probability space.
    for (t1, t2, t12) in [(1.0, 3.0, 0.8), (2.0, 1.0, 1.5), (0.5, 0.5, 2.0)] {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let total = cause_probability(&p, Cause::First) + cause_probability(&p, Cause::Second);
        c.check(
            (total - 1.0).abs() <= 1e-10,
            || format!("({t1},{t2},{t12}): cause probabilities sum to {total}"),
        );
    }

    c.finish();
}

#[test]
fn criterion_05_dependence_signs_and_limits() {
    let mut c = Criterion::new(5, "dependence measures: signs, ratio limit, tails, RCSD", 300.0);

    // tau and rho non-positive (within Monte Carlo slack) over the shape grid.
    let nodes = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut stream = 0u64;
    for &alpha in &nodes {
        for &beta in &nodes {
            let p = BnmoParams::new((1.0 - alpha) / alpha, (1.0 - beta) / beta, 1.0).unwrap();
            let opts = RhoTauOptions { stream, ..Default::default() };
            let est = rho_tau_ratio(&p, &opts).unwrap();
            c.check(
                est.tau <= 3.0 * est.tau_se,
                || format!("tau at ({alpha},{beta}) positive: {} ± {}", est.tau, est.tau_se),
            );
            c.check(
                est.rho <= 1e-9,
                || format!("rho at ({alpha},{beta}) positive: {}", est.rho),
            );
            stream += 1;
        }
    }

    // Weak-dependence limit of the ratio at alpha = beta = 0.05.
    let corner = BnmoParams::new(19.0, 19.0, 1.0).unwrap();
    let est = rho_tau_ratio(&corner, &RhoTauOptions::default()).unwrap();
    c.check(
        (1.45..=1.55).contains(&est.ratio),
        || format!("rho/tau at the weak corner: {} ± {}", est.ratio, est.ratio_se),
    );

    // Tail coefficients decrease to zero along ladders toward each corner.
    for (t1, t2, t12) in [(1.0, 1.0, 1.0), (1.0, 3.0, 0.8)] {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let lower_ladder = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01];
        let lowers: Vec<f64> = lower_ladder
            .iter()
            .map(|&t| tail_dependence(&p, t).unwrap().0)
            .collect();
        c.check(
            lowers.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            || format!("({t1},{t2},{t12}): lower tail not monotone: {lowers:?}"),
        );
        c.check(
            *lowers.last().unwrap() <= 0.02,
            || format!("({t1},{t2},{t12}): lower tail does not vanish: {lowers:?}"),
        );
        let upper_ladder = [0.5, 0.8, 0.9, 0.95, 0.98, 0.99];
        let uppers: Vec<f64> = upper_ladder
            .iter()
            .map(|&t| tail_dependence(&p, t).unwrap().1)
            .collect();
        c.check(
            uppers.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            || format!("({t1},{t2},{t12}): upper tail not monotone: {uppers:?}"),
        );
        c.check(
            *uppers.last().unwrap() <= 0.02,
            || format!("({t1},{t2},{t12}): upper tail does not vanish: {uppers:?}"),
        );
    }

    // The log-survival cross partial stays non-positive on interior grids.
    for (t1, t2, t12) in [(1.0, 1.0, 1.0), (1.0, 3.0, 0.8), (2.0, 0.5, 1.5)] {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let verdict = rcsd_diagnostic(&p, 40).unwrap();
        c.check(
            verdict.holds(),
            || format!(
                "({t1},{t2},{t12}): {} RCSD violations in {} points",
                verdict.violations.len(),
                verdict.points_checked
            ),
        );
    }

    c.finish();
}

#[test]
fn criterion_06_positive_sign_tau() {
    let mut c = Criterion::new(6, "positive-coupling tau matches the classical value", 60.0);
    for (k, (t1, t2, t12)) in [(1.0, 1.0, 1.0), (1.0, 3.0, 0.8), (2.0, 0.5, 1.5)]
        .into_iter()
        .enumerate()
    {
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let expected = t12 / (t1 + t2 + t12);
        let cfg = McConfig { n: 1_000_000, seed: 0xACC6, stream: k as u64, workers: 1 };
        let est = kendall_tau(&p, DepSign::Positive, &cfg).unwrap();
        c.check(
            (est.value - expected).abs() <= 3.0 * est.standard_error,
            || format!(
                "({t1},{t2},{t12}): tau {} ± {} vs {expected}",
                est.value, est.standard_error
            ),
        );
    }
    c.finish();
}

#[test]
fn criterion_07_score_correctness() {
    let mut c = Criterion::new(7, "analytic score matches finite differences", 10.0);
    let gen = BnmoParams::new(1.0, 2.0, 1.2).unwrap();
    let mut rng = RngStream::new(0xACC7, 0);
    let mut saw_mixed = false;
    for trial in 0..20 {
        let data = sample_dataset(&gen, DepSign::Negative, 40, 0xACC7, trial as u64 + 1).unwrap();
        let bound = nmo::estimation::theta12_feasible_max(&data).unwrap();
        let t1 = 0.3 + 2.0 * rng.uniform_open();
        let t2 = 0.3 + 2.0 * rng.uniform_open();
        let t12 = bound * (0.1 + 0.85 * rng.uniform_open());
        let p = BnmoParams::new(t1, t2, t12).unwrap();
        let part = classify(&data, p.theta12(), 1e-9).unwrap();
        if part.m1() > 0 && part.m2() > 0 {
            saw_mixed = true;
        }
        let analytic = score(&p, &data, &part).unwrap();
        let thetas = [t1, t2, t12];
        for (k, &tk) in thetas.iter().enumerate() {
            let h = 1e-6 * tk;
            let mut up = thetas;
            up[k] += h;
            let mut down = thetas;
            down[k] -= h;
            let ll = |v: [f64; 3]| {
                log_likelihood(&BnmoParams::new(v[0], v[1], v[2]).unwrap(), &data, &part)
            };
            let fd = (ll(up) - ll(down)) / (2.0 * h);
            c.check(
                (analytic[k] - fd).abs() <= 1e-5 * fd.abs().max(1.0),
                || format!(
                    "trial {trial}, component {k}: analytic {} vs fd {fd}",
                    analytic[k]
                ),
            );
        }
    }
    c.check(saw_mixed, || "no trial produced a mixed m1/m2 partition".to_string());
    c.finish();
}

#[test]
fn criterion_08_estimator_bias_and_mse() {
    let mut c = Criterion::new(8, "bias and MSE shrink with the sample size", 1800.0);
    let truth = BnmoParams::new(1.0, 3.0, 0.8).unwrap();
    let table = bias_mse_study(&truth, DepSign::Negative, &[50, 100, 200], 500, 0, 4).unwrap();
    c.check(table.len() == 3, || format!("expected 3 rows, got {}", table.len()));
    let names = ["theta1", "theta2", "theta12"];
    for k in 0..3 {
        for w in table.windows(2) {
            c.check(
                w[1].mse[k] < w[0].mse[k],
                || format!(
                    "MSE({}) not decreasing: {} at m={} vs {} at m={}",
                    names[k], w[0].mse[k], w[0].m, w[1].mse[k], w[1].m
                ),
            );
        }
    }
    c.check(
        table[2].bias[2].abs() < table[0].bias[2].abs(),
        || format!(
            "|bias(theta12)| did not shrink: {} at m=50 vs {} at m=200",
            table[0].bias[2], table[2].bias[2]
        ),
    );
    for cell in &table {
        c.check(
            cell.failures == 0,
            || format!("{} fit failures at m={}", cell.failures, cell.m),
        );
    }
    c.finish();
}

#[test]
fn criterion_09_multivariate_consistency() {
    let mut c = Criterion::new(9, "multivariate survival, Sklar identity, exponent sums", 60.0);

    // Trivariate survival against Monte Carlo at five probe boxes.
    let mp = MnmoParams::new(
        vec![1.0, 2.0, 0.5],
        vec![0.8, 0.3, 1.1],
        vec![DepSign::Negative, DepSign::Positive, DepSign::Negative],
    )
    .unwrap();
    let m = 1_000_000;
    let draws = sample_mnmo_dataset(&mp, m, 0xACC9, 0, PairUniformMode::IndependentPerPair)
        .unwrap();
    for probe in [
        [0.2, 0.2, 0.2],
        [0.1, 0.3, 0.2],
        [0.05, 0.4, 0.1],
        [0.3, 0.1, 0.15],
        [0.25, 0.25, 0.05],
    ] {
        let truth = mnmo_survival(&mp, &probe).unwrap();
        let hits = draws
            .iter()
            .filter(|s| s.x.iter().zip(&probe).all(|(&v, &q)| v > q))
            .count();
        let freq = hits as f64 / m as f64;
        let band = binomial_band(truth, m, 3.0);
        c.check(
            (freq - truth).abs() <= band,
            || format!("probe {probe:?}: MC {freq:.5} vs survival {truth:.5} ± {band:.5}"),
        );
    }

    // Sklar identity for all-negative models in two and three dimensions.
    let cases = vec![
        MnmoParams::new(vec![1.0, 3.0], vec![0.8], vec![DepSign::Negative]).unwrap(),
        MnmoParams::new(
            vec![0.6, 1.4, 2.2],
            vec![0.9, 0.4, 1.3],
            vec![DepSign::Negative; 3],
        )
        .unwrap(),
    ];
    for mp in &cases {
        let g = gammas_from_params(mp);
        let probes: &[&[f64]] = if mp.n() == 2 {
            &[&[0.1, 0.3], &[0.5, 0.2], &[0.05, 0.05]]
        } else {
            &[&[0.1, 0.2, 0.3], &[0.05, 0.05, 0.05], &[0.4, 0.1, 0.25]]
        };
        for &x in probes {
            let u: Vec<f64> = (0..mp.n())
                .map(|j| (-mp.row_sum(j) * x[j]).exp())
                .collect();
            let via_copula = survival_copula(&g, &u).unwrap();
            let direct = mnmo_survival(mp, x).unwrap();
            c.check(
                (via_copula - direct).abs() <= 1e-12,
                || format!("n={} at {x:?}: copula {via_copula} vs direct {direct}", mp.n()),
            );
        }
    }

    // Copula exponents sum to one per coordinate.
    for case in cases.iter().chain(std::iter::once(&mp)) {
        let g = gammas_from_params(case);
        for j in 0..case.n() {
            let mut total = g.diag[j];
            for (k, (a, b)) in case.pairs().enumerate() {
                if a == j {
                    total += g.pair_lo[k];
                } else if b == j {
                    total += g.pair_hi[k];
                }
            }
            c.check(
                (total - 1.0).abs() <= 1e-14,
                || format!("n={}, coordinate {j}: exponents sum to {total}", case.n()),
            );
        }
    }

    c.finish();
}

#[test]
fn criterion_10_fit_and_gof_pipeline() {
    let mut c = Criterion::new(10, "fit + goodness-of-fit pipeline on plain CSV", 120.0);

    // An arbitrary two-column dataset (no flags, assorted scales) must flow
    // through parsing, descriptive statistics, fitting, marginal tests, and
    // the joint bootstrap without any error.
    let mut csv_text = String::from("r,s\n");
    let mut rng = RngStream::new(0xACCA, 0);
    for _ in 0..80 {
        let r = 0.02 + 3.0 * rng.uniform_open().powi(2);
        let s = 0.05 + 1.5 * rng.uniform_open();
        csv_text.push_str(&format!("{r},{s}\n"));
    }
    let data = Dataset::from_csv_reader(csv_text.as_bytes()).unwrap();
    let cfg = FitConfig::default();
    let summary_r = summarize(&data.r_column());
    let summary_s = summarize(&data.s_column());
    c.check(summary_r.is_ok() && summary_s.is_ok(), || "summaries failed".to_string());
    let measures = empirical_measures(&data);
    c.check(measures.is_ok(), || format!("sample measures failed: {measures:?}"));
    match fit_mle(&data, &cfg) {
        Ok(fit) => {
            let rate_r = fit.theta_hat.theta1() + fit.theta_hat.theta12();
            let rate_s = fit.theta_hat.theta2() + fit.theta_hat.theta12();
            c.check(
                ks_marginal(&data.r_column(), rate_r).is_ok()
                    && ks_marginal(&data.s_column(), rate_s).is_ok(),
                || "marginal tests failed".to_string(),
            );
            match gof_joint_bootstrap(&data, &fit, &cfg, 200, 0xACCB, 1) {
                Ok(report) => c.check(
                    report.statistic.is_finite() && report.replicates == 200,
                    || format!("malformed bootstrap report: {report:?}"),
                ),
                Err(e) => c.check(false, || format!("joint bootstrap errored: {e}")),
            }
        }
        Err(e) => c.check(false, || format!("fit errored on plain CSV: {e}")),
    }

    // Simulating at the application-scale estimate and refitting must land
    // within likelihood noise of the generating parameters.
    let gen = BnmoParams::new(0.01, 3.67, 0.038).unwrap();
    let sim = sample_dataset(&gen, DepSign::Negative, 52, 0xACCC, 0).unwrap();
    match fit_mle(&sim, &FitConfig::default()) {
        Ok(fit) => {
            let part = classify(&sim, gen.theta12(), 1e-9).unwrap();
            let ll_gen = log_likelihood(&gen, &sim, &part);
            c.check(
                fit.log_likelihood >= ll_gen - 1e-9,
                || format!(
                    "refit optimum {} fell below the generating likelihood {ll_gen}",
                    fit.log_likelihood
                ),
            );
            c.check(
                fit.log_likelihood - ll_gen <= 15.0,
                || format!(
                    "refit optimum {} implausibly far above the generating likelihood {ll_gen}",
                    fit.log_likelihood
                ),
            );
        }
        Err(e) => c.check(false, || format!("refit errored: {e}")),
    }

    c.finish();
}
