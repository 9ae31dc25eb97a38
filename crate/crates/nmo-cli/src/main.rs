//! `nmo` — command-line surface for the shock-model library: simulate
//! datasets, fit by maximum likelihood, sweep dependence measures and
//! stress-strength surfaces over the shape-parameter square, run
//! goodness-of-fit reports, and benchmark the estimator.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 numerical
//! non-convergence, 4 I/O or malformed data files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "nmo",
    version,
    about = "Shock-model toolkit: simulation, fitting, and dependence analysis",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SignArg {
    /// Shared shock kills both components together (classical model).
    #[value(name = "+1", alias = "pos", alias = "positive")]
    Positive,
    /// Antithetic shock pair: large values of one coordinate force the
    /// other onto small values (the negative-dependence extension).
    #[value(name = "-1", alias = "neg", alias = "negative")]
    Negative,
}

impl From<SignArg> for nmo::DepSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Positive => nmo::DepSign::Positive,
            SignArg::Negative => nmo::DepSign::Negative,
        }
    }
}

#[derive(Args)]
struct ThetaArgs {
    /// Rate of the shock killing only the first component.
    #[arg(long, value_name = "RATE")]
    theta1: f64,
    /// Rate of the shock killing only the second component.
    #[arg(long, value_name = "RATE")]
    theta2: f64,
    /// Rate of the shared/antithetic shock pair.
    #[arg(long, value_name = "RATE")]
    theta12: f64,
}

#[derive(Args)]
struct GridArgs {
    /// Nodes per axis of the (alpha, beta) sweep.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Smallest alpha/beta node.
    #[arg(long, default_value_t = 0.05)]
    lo: f64,
    /// Largest alpha/beta node.
    #[arg(long, default_value_t = 0.95)]
    hi: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset and write it as CSV.
    ///
    /// Bivariate mode takes --theta1/--theta2/--theta12 and --sign and
    /// writes the r,s,is_singular schema. Passing --params with a JSON
    /// parameter file switches to the n-dimensional model and writes
    /// x1..xn plus one is_singular_i_j column per pair.
    Simulate {
        #[arg(long, value_name = "RATE", required_unless_present = "params")]
        theta1: Option<f64>,
        #[arg(long, value_name = "RATE", required_unless_present = "params")]
        theta2: Option<f64>,
        #[arg(long, value_name = "RATE", required_unless_present = "params")]
        theta12: Option<f64>,
        /// Dependence sign of the shock pair.
        #[arg(long, value_enum, default_value = "-1")]
        sign: SignArg,
        /// JSON parameter file for the n-dimensional model (conflicts with
        /// the --theta* flags).
        #[arg(long, value_name = "FILE", conflicts_with_all = ["theta1", "theta2", "theta12", "sign"])]
        params: Option<PathBuf>,
        /// Number of rows to draw.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent substream under the same seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output CSV path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Fit the bivariate model to a CSV dataset by maximum likelihood.
    ///
    /// Prints a human-readable summary; the JSON result goes to --out when
    /// given, otherwise to stdout after the summary.
    Fit {
        /// Input CSV with header r,s or r,s,is_singular.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Where to write the JSON result.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// (theta1, theta2) optimizer starts per theta12 grid point.
        #[arg(long, default_value_t = 3)]
        starts: usize,
        /// theta12 grid points in the first stage.
        #[arg(long, default_value_t = 24)]
        grid_size: usize,
        /// Tolerance for classifying unflagged rows as singular.
        #[arg(long, default_value_t = 1e-9)]
        tol_singular: f64,
        /// Seed for the randomized extra starts.
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },

    /// Sweep dependence measures over the (alpha, beta) shape square.
    ///
    /// Each node maps to theta12 = 1, theta1 = (1-alpha)/alpha,
    /// theta2 = (1-beta)/beta (the measures depend on the shapes only) and
    /// emits Kendall's tau, Spearman's rho, their ratio, and both tail
    /// coefficients at --tail-level.
    Measures {
        #[command(flatten)]
        grid: GridArgs,
        /// Distance from the corner for the finite-level tail coefficients:
        /// the lower one is evaluated at t, the upper at 1-t.
        #[arg(long, default_value_t = 0.05)]
        tail_level: f64,
        /// Target relative standard error for the tau estimate.
        #[arg(long, default_value_t = 0.01)]
        rel_se: f64,
        #[arg(long, default_value_t = 0x9e3779b97f4a7c15)]
        seed: u64,
        /// Output CSV path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Sweep the stress-strength index P(R < S) over the shape square.
    Stress {
        #[command(flatten)]
        grid: GridArgs,
        /// Output CSV path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Goodness-of-fit report: descriptive statistics, marginal
    /// Kolmogorov-Smirnov tests against the fitted exponential marginals,
    /// and a parametric-bootstrap joint test.
    Gof {
        /// Input CSV with header r,s or r,s,is_singular.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Reuse an existing fit (JSON from `nmo fit`) instead of refitting.
        #[arg(long, value_name = "FILE")]
        fitted: Option<PathBuf>,
        /// Parametric-bootstrap replicates for the joint test (minimum 200).
        #[arg(long, default_value_t = 500)]
        bootstrap: usize,
        /// Tolerance for classifying unflagged rows as singular.
        #[arg(long, default_value_t = 1e-9)]
        tol_singular: f64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Worker threads for the bootstrap.
        #[arg(long, env = "NMO_WORKERS", default_value_t = 1)]
        workers: usize,
        /// Where to write the JSON report.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Repeated-sampling benchmark of the estimator: bias and MSE per
    /// parameter across sample sizes.
    Bench {
        #[command(flatten)]
        theta: ThetaArgs,
        /// Dependence sign of the shock pair.
        #[arg(long, value_enum, default_value = "-1")]
        sign: SignArg,
        /// Comma-separated sample sizes, e.g. 50,100,200.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        sizes: Vec<usize>,
        /// Replications per sample size.
        #[arg(long, default_value_t = 500)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for the replications.
        #[arg(long, env = "NMO_WORKERS", default_value_t = 1)]
        workers: usize,
        /// Output CSV path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

/// Map library errors onto the documented exit codes: bad input 2,
/// numerical trouble 3, I/O and malformed files 4.
fn exit_code(err: &nmo::Error) -> u8 {
    use nmo::Error;
    match err {
        Error::InvalidParameter(_) | Error::Domain(_) | Error::OutsideInterior { .. } => 2,
        Error::QuadratureNonConvergence { .. }
        | Error::InvalidBracket { .. }
        | Error::NonFiniteObjective { .. }
        | Error::NonConvergence(_)
        | Error::IllConditionedRatio { .. } => 3,
        Error::CsvParse { .. } | Error::Json(_) | Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { theta1, theta2, theta12, sign, params, m, seed, stream, out } => {
            match params {
                Some(path) => commands::simulate_multivariate(&path, m, seed, stream, &out),
                None => commands::simulate_bivariate(
                    // Presence is enforced by clap's required_unless_present.
                    theta1.unwrap(),
                    theta2.unwrap(),
                    theta12.unwrap(),
                    sign.into(),
                    m,
                    seed,
                    stream,
                    &out,
                ),
            }
        }
        Command::Fit { input, out, starts, grid_size, tol_singular, seed } => {
            let cfg = commands::fit_config(starts, grid_size, tol_singular, seed);
            commands::fit(&input, out.as_deref(), &cfg)
        }
        Command::Measures { grid, tail_level, rel_se, seed, out } => {
            commands::measures(&grid, tail_level, rel_se, seed, &out)
        }
        Command::Stress { grid, out } => commands::stress(&grid, &out),
        Command::Gof { input, fitted, bootstrap, tol_singular, seed, workers, out } => commands::gof(
            &input,
            fitted.as_deref(),
            bootstrap,
            tol_singular,
            seed,
            workers,
            out.as_deref(),
        ),
        Command::Bench { theta, sign, sizes, reps, seed, workers, out } => commands::bench(
            &theta,
            sign.into(),
            &sizes,
            reps,
            seed,
            workers,
            &out,
        ),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
