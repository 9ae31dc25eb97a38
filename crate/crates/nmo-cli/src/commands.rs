//! Implementations of the subcommands. Every function here is deterministic
//! given its flags and seed; worker counts change wall-clock time only.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use nmo::data::{summarize, Dataset, VariableSummary};
use nmo::dependence::{
    empirical_measures, rho_tau_ratio, tail_dependence, MeasureEstimate, RhoTauOptions,
};
use nmo::estimation::{
    classify, fit_mle, gof_joint_bootstrap, ks_marginal, log_likelihood, score,
    theta12_feasible_max, FitConfig, FitResult, GofReport, KsTest,
};
use nmo::multivariate::{sample_mnmo_dataset, MnmoParams, PairUniformMode};
use nmo::sampler::sample_dataset;
use nmo::stress::stress_strength;
use nmo::{BnmoParams, DepSign, Error, Result};

use crate::{GridArgs, ThetaArgs};

/// Shortest decimal that round-trips to the same f64 (Rust's default float
/// formatting), so emitted CSV re-parses losslessly.
fn fmt(x: f64) -> String {
    format!("{x}")
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Domain(format!("csv write error: {other:?}")),
    }
}

// ---------------------------------------------------------------------------
// simulate

#[allow(clippy::too_many_arguments)]
pub fn simulate_bivariate(
    theta1: f64,
    theta2: f64,
    theta12: f64,
    sign: DepSign,
    m: usize,
    seed: u64,
    stream: u64,
    out: &Path,
) -> Result<()> {
    let params = BnmoParams::new(theta1, theta2, theta12)?;
    let data = sample_dataset(&params, sign, m, seed, stream)?;
    data.to_csv_path(out)?;
    println!("wrote {m} rows to {}", out.display());
    Ok(())
}

pub fn simulate_multivariate(
    params_path: &Path,
    m: usize,
    seed: u64,
    stream: u64,
    out: &Path,
) -> Result<()> {
    let text = std::fs::read_to_string(params_path)?;
    let mp = MnmoParams::from_json_str(&text)?;
    let draws = sample_mnmo_dataset(&mp, m, seed, stream, PairUniformMode::IndependentPerPair)?;

    let file = std::fs::File::create(out)?;
    let mut wtr = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<String> = (1..=mp.n()).map(|j| format!("x{j}")).collect();
    for (i, j) in mp.pairs() {
        header.push(format!("is_singular_{}_{}", i + 1, j + 1));
    }
    wtr.write_record(&header).map_err(csv_io)?;
    for sample in &draws {
        let mut record: Vec<String> = sample.x.iter().map(|&v| fmt(v)).collect();
        record.extend(sample.pair_flags.iter().map(|f| f.to_string()));
        wtr.write_record(&record).map_err(csv_io)?;
    }
    wtr.flush()?;
    println!("wrote {m} rows ({}-dimensional) to {}", mp.n(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// fit

pub fn fit_config(starts: usize, grid_size: usize, tol_singular: f64, seed: u64) -> FitConfig {
    FitConfig { n_starts: starts, grid_size, tol: tol_singular, seed }
}

/// JSON document emitted by `nmo fit`.
#[derive(Serialize)]
struct FitDocument {
    fit: FitResult,
    /// Gradient of the log-likelihood at the estimate, when the partition
    /// at the fitted theta12 admits one (null otherwise, e.g. when the
    /// estimate sits on the feasibility boundary).
    score_at_estimate: Option<[f64; 3]>,
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let data = Dataset::from_csv_path(path)?;
    if data.len() < 3 {
        return Err(Error::Domain(format!(
            "fitting needs at least 3 rows, got {}",
            data.len()
        )));
    }
    Ok(data)
}

fn score_diagnostic(data: &Dataset, fit: &FitResult, tol: f64) -> Option<[f64; 3]> {
    let part = classify(data, fit.theta_hat.theta12(), tol).ok()?;
    score(&fit.theta_hat, data, &part).ok()
}

fn print_fit_summary(fit: &FitResult, score_at: &Option<[f64; 3]>) {
    let p = &fit.theta_hat;
    println!(
        "rows: {} ({} continuous, {} singular)",
        fit.m1 + fit.m2,
        fit.m1,
        fit.m2
    );
    println!("theta1  = {:.6}", p.theta1());
    println!("theta2  = {:.6}", p.theta2());
    if fit.theta12_upper_bound.is_finite() {
        println!(
            "theta12 = {:.6}  (feasibility bound {:.6})",
            p.theta12(),
            fit.theta12_upper_bound
        );
    } else {
        println!("theta12 = {:.6}  (unconstrained)", p.theta12());
    }
    println!("alpha   = {:.6}, beta = {:.6}", p.alpha(), p.beta());
    println!("log-likelihood = {:.4}", fit.log_likelihood);
    println!(
        "converged: {} ({} starts attempted)",
        fit.converged, fit.n_starts
    );
    match score_at {
        Some(g) => println!(
            "score at estimate = [{:.3e}, {:.3e}, {:.3e}]",
            g[0], g[1], g[2]
        ),
        None => println!("score at estimate = (not defined; estimate on a boundary)"),
    }
}

fn emit_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            file.write_all(text.as_bytes())?;
            file.write_all(b"\n")?;
            println!("wrote JSON to {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

pub fn fit(input: &Path, out: Option<&Path>, cfg: &FitConfig) -> Result<()> {
    let data = load_dataset(input)?;
    let fit = fit_mle(&data, cfg)?;
    let score_at = score_diagnostic(&data, &fit, cfg.tol);
    print_fit_summary(&fit, &score_at);
    emit_json(&FitDocument { fit, score_at_estimate: score_at }, out)
}

// ---------------------------------------------------------------------------
// measures / stress sweeps

fn grid_nodes(grid: &GridArgs) -> Result<Vec<f64>> {
    if grid.grid == 0 {
        return Err(Error::Domain("sweep grid needs at least one node".into()));
    }
    if !(grid.lo > 0.0 && grid.hi < 1.0 && grid.lo <= grid.hi) {
        return Err(Error::Domain(format!(
            "shape nodes must satisfy 0 < lo <= hi < 1, got lo = {}, hi = {}",
            grid.lo, grid.hi
        )));
    }
    if grid.grid == 1 {
        return Ok(vec![grid.lo]);
    }
    let step = (grid.hi - grid.lo) / (grid.grid - 1) as f64;
    Ok((0..grid.grid).map(|k| grid.lo + step * k as f64).collect())
}

/// Canonical parameters with the given shapes: theta12 = 1 and the
/// idiosyncratic rates solved from alpha = theta12/(theta1+theta12),
/// beta = theta12/(theta2+theta12). Copula-level quantities depend on the
/// shapes only, so this representative generates the whole sweep.
fn shape_to_params(alpha: f64, beta: f64) -> Result<BnmoParams> {
    BnmoParams::new((1.0 - alpha) / alpha, (1.0 - beta) / beta, 1.0)
}

pub fn measures(grid: &GridArgs, tail_level: f64, rel_se: f64, seed: u64, out: &Path) -> Result<()> {
    if !(tail_level > 0.0 && tail_level < 1.0) {
        return Err(Error::Domain(format!(
            "tail level must lie in (0,1), got {tail_level}"
        )));
    }
    if !(rel_se > 0.0 && rel_se < 1.0) {
        return Err(Error::Domain(format!(
            "relative standard-error target must lie in (0,1), got {rel_se}"
        )));
    }
    let nodes = grid_nodes(grid)?;

    let file = std::fs::File::create(out)?;
    let mut wtr = csv::Writer::from_writer(std::io::BufWriter::new(file));
    wtr.write_record([
        "alpha",
        "beta",
        "theta1",
        "theta2",
        "theta12",
        "tau",
        "tau_se",
        "rho",
        "rho_over_tau",
        "ratio_se",
        "lambda_l",
        "lambda_u",
    ])
    .map_err(csv_io)?;

    let mut node_index = 0u64;
    for &alpha in &nodes {
        for &beta in &nodes {
            let params = shape_to_params(alpha, beta)?;
            let opts = RhoTauOptions {
                rel_se_target: rel_se,
                seed,
                stream: node_index,
                ..Default::default()
            };
            let est = rho_tau_ratio(&params, &opts)?;
            // Each coefficient is evaluated `tail_level` away from its own
            // corner: the lower coefficient limits at t -> 0, the upper at
            // t -> 1.
            let (lambda_l, _) = tail_dependence(&params, tail_level)?;
            let (_, lambda_u) = tail_dependence(&params, 1.0 - tail_level)?;
            wtr.write_record([
                fmt(alpha),
                fmt(beta),
                fmt(params.theta1()),
                fmt(params.theta2()),
                fmt(params.theta12()),
                fmt(est.tau),
                fmt(est.tau_se),
                fmt(est.rho),
                fmt(est.ratio),
                fmt(est.ratio_se),
                fmt(lambda_l),
                fmt(lambda_u),
            ])
            .map_err(csv_io)?;
            node_index += 1;
        }
    }
    wtr.flush()?;
    println!(
        "wrote {} measure rows to {}",
        nodes.len() * nodes.len(),
        out.display()
    );
    Ok(())
}

pub fn stress(grid: &GridArgs, out: &Path) -> Result<()> {
    let nodes = grid_nodes(grid)?;
    let file = std::fs::File::create(out)?;
    let mut wtr = csv::Writer::from_writer(std::io::BufWriter::new(file));
    wtr.write_record(["alpha", "beta", "theta1", "theta2", "theta12", "stress_index"])
        .map_err(csv_io)?;
    for &alpha in &nodes {
        for &beta in &nodes {
            let params = shape_to_params(alpha, beta)?;
            wtr.write_record([
                fmt(alpha),
                fmt(beta),
                fmt(params.theta1()),
                fmt(params.theta2()),
                fmt(params.theta12()),
                fmt(stress_strength(&params)),
            ])
            .map_err(csv_io)?;
        }
    }
    wtr.flush()?;
    println!(
        "wrote {} stress rows to {}",
        nodes.len() * nodes.len(),
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gof

/// Per-variable and joint descriptive statistics (the usual first table of
/// an application section).
#[derive(Serialize)]
struct Descriptive {
    r: VariableSummary,
    s: VariableSummary,
    sample_tau: MeasureEstimate,
    sample_rho: MeasureEstimate,
    /// rho/tau; null when |tau| is too small for the ratio to mean anything.
    rho_over_tau: Option<f64>,
}

#[derive(Serialize)]
struct GofDocument {
    descriptive: Descriptive,
    fit: FitResult,
    score_at_estimate: Option<[f64; 3]>,
    /// KS test of the first marginal against Exp(theta1 + theta12).
    marginal_r: KsTest,
    /// KS test of the second marginal against Exp(theta2 + theta12).
    marginal_s: KsTest,
    joint: GofReport,
}

fn descriptive_block(data: &Dataset) -> Result<Descriptive> {
    let r = summarize(&data.r_column())?;
    let s = summarize(&data.s_column())?;
    let (tau, rho) = empirical_measures(data)?;
    let rho_over_tau = if tau.value.abs() > 1e-12 {
        Some(rho.value / tau.value)
    } else {
        None
    };
    Ok(Descriptive { r, s, sample_tau: tau, sample_rho: rho, rho_over_tau })
}

/// Read the parameters out of a `nmo fit` JSON document (or any JSON object
/// carrying `theta_hat`/`fit.theta_hat`), then rebuild the fit summary
/// against the present dataset so the report is internally consistent.
fn fit_from_json(path: &Path, data: &Dataset, tol: f64) -> Result<FitResult> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let theta = value
        .get("fit")
        .and_then(|f| f.get("theta_hat"))
        .or_else(|| value.get("theta_hat"))
        .ok_or_else(|| Error::Domain(format!(
            "no theta_hat found in {}; expected a `nmo fit` JSON document",
            path.display()
        )))?;
    let theta_hat: BnmoParams = serde_json::from_value(theta.clone())?;
    let part = classify(data, theta_hat.theta12(), tol)?;
    let ll = log_likelihood(&theta_hat, data, &part);
    Ok(FitResult {
        theta_hat,
        log_likelihood: ll,
        m1: part.m1(),
        m2: part.m2(),
        n_starts: 0,
        converged: true,
        best_start: [theta_hat.theta1(), theta_hat.theta2(), theta_hat.theta12()],
        theta12_upper_bound: theta12_feasible_max(data)?,
    })
}

fn print_variable_summary(name: &str, v: &VariableSummary) {
    println!(
        "{name}: min {:.4}  q1 {:.4}  median {:.4}  mean {:.4}  q3 {:.4}  max {:.4}  sd {:.4}",
        v.min, v.q1, v.median, v.mean, v.q3, v.max, v.sd
    );
}

pub fn gof(
    input: &Path,
    fitted: Option<&Path>,
    bootstrap: usize,
    tol_singular: f64,
    seed: u64,
    workers: usize,
    out: Option<&Path>,
) -> Result<()> {
    let data = load_dataset(input)?;
    let cfg = fit_config(3, 24, tol_singular, 0x5eed);

    let descriptive = descriptive_block(&data)?;
    let fit = match fitted {
        Some(path) => fit_from_json(path, &data, tol_singular)?,
        None => fit_mle(&data, &cfg)?,
    };
    let score_at = score_diagnostic(&data, &fit, tol_singular);

    let rate_r = fit.theta_hat.theta1() + fit.theta_hat.theta12();
    let rate_s = fit.theta_hat.theta2() + fit.theta_hat.theta12();
    let marginal_r = ks_marginal(&data.r_column(), rate_r)?;
    let marginal_s = ks_marginal(&data.s_column(), rate_s)?;

    let joint = gof_joint_bootstrap(&data, &fit, &cfg, bootstrap, seed, workers)?;

    println!("descriptive statistics ({} rows)", data.len());
    print_variable_summary("  r", &descriptive.r);
    print_variable_summary("  s", &descriptive.s);
    println!(
        "  sample tau = {:.4} (se {:.4}), sample rho = {:.4} (se {:.4})",
        descriptive.sample_tau.value,
        descriptive.sample_tau.standard_error,
        descriptive.sample_rho.value,
        descriptive.sample_rho.standard_error
    );
    if let Some(ratio) = descriptive.rho_over_tau {
        println!("  rho/tau = {ratio:.4}");
    }
    println!();
    print_fit_summary(&fit, &score_at);
    println!();
    println!(
        "marginal KS (r vs Exp({:.4})): D = {:.4}, p = {:.4}",
        rate_r, marginal_r.statistic, marginal_r.p_value
    );
    println!(
        "marginal KS (s vs Exp({:.4})): D = {:.4}, p = {:.4}",
        rate_s, marginal_s.statistic, marginal_s.p_value
    );
    match joint.p_value {
        Some(p) => println!(
            "joint bootstrap: D = {:.4}, p = {:.4} ({} of {} replicates used)",
            joint.statistic, p, joint.replicates_used, joint.replicates
        ),
        None => println!(
            "joint bootstrap: D = {:.4}, p withheld ({} of {} refits failed)",
            joint.statistic, joint.refit_failures, joint.replicates
        ),
    }

    emit_json(
        &GofDocument { descriptive, fit, score_at_estimate: score_at, marginal_r, marginal_s, joint },
        out,
    )
}

// ---------------------------------------------------------------------------
// bench

pub fn bench(
    theta: &ThetaArgs,
    sign: DepSign,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    workers: usize,
    out: &Path,
) -> Result<()> {
    let params = BnmoParams::new(theta.theta1, theta.theta2, theta.theta12)?;
    let table = nmo::estimation::bias_mse_study(&params, sign, sizes, reps, seed, workers)?;

    let file = std::fs::File::create(out)?;
    let mut wtr = csv::Writer::from_writer(std::io::BufWriter::new(file));
    wtr.write_record([
        "m",
        "bias_theta1",
        "bias_theta2",
        "bias_theta12",
        "mse_theta1",
        "mse_theta2",
        "mse_theta12",
        "replications_used",
        "failures",
    ])
    .map_err(csv_io)?;
    for cell in &table {
        wtr.write_record([
            cell.m.to_string(),
            fmt(cell.bias[0]),
            fmt(cell.bias[1]),
            fmt(cell.bias[2]),
            fmt(cell.mse[0]),
            fmt(cell.mse[1]),
            fmt(cell.mse[2]),
            cell.replications_used.to_string(),
            cell.failures.to_string(),
        ])
        .map_err(csv_io)?;
        println!(
            "m = {:>5}: bias = [{:+.4}, {:+.4}, {:+.4}], mse = [{:.4}, {:.4}, {:.4}] ({} used, {} failures)",
            cell.m,
            cell.bias[0],
            cell.bias[1],
            cell.bias[2],
            cell.mse[0],
            cell.mse[1],
            cell.mse[2],
            cell.replications_used,
            cell.failures
        );
    }
    wtr.flush()?;
    println!("wrote {} benchmark rows to {}", table.len(), out.display());
    Ok(())
}
