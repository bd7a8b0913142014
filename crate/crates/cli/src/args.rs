use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use proxgn_core::{ModelKind, SolverConfig};

#[derive(Debug, Parser)]
#[command(
    name = "proxgn",
    version,
    about = "Proximal Gauss-Newton solver with local convergence certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write report.json and trace.csv.
    Solve(SolveArgs),
    /// Compute the convergence radius and write certificate.json.
    Certify(CertifyArgs),
    /// Solve from a grid of start points, audit every run, write verification.json.
    Verify(VerifyArgs),
    /// List the built-in problems.
    Catalog,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ProblemSource {
    /// Name of a built-in problem (see `proxgn catalog`).
    #[arg(long)]
    pub problem: Option<String>,
    /// Path to a JSON problem file.
    #[arg(long, value_name = "PATH")]
    pub problem_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Lipschitz,
    Smale,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Lipschitz => ModelKind::Lipschitz,
            ModelArg::Smale => ModelKind::Smale,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Majorant model; defaults to the problem's declared model.
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Stop when the step length falls to this.
    #[arg(long, value_parser = positive, default_value_t = SolverConfig::default().step_tolerance)]
    pub tol_step: f64,
    /// Converged when the stationarity residual falls to this.
    #[arg(long, value_parser = positive, default_value_t = SolverConfig::default().stationarity_tolerance)]
    pub tol_stationarity: f64,
    /// Tolerance of the inner prox solver.
    #[arg(long, value_parser = positive, default_value_t = SolverConfig::default().prox_tolerance)]
    pub tol_prox: f64,
    /// Maximum number of outer iterations.
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iter,
            step_tolerance: self.tol_step,
            stationarity_tolerance: self.tol_stationarity,
            prox_tolerance: self.tol_prox,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Start point as comma-separated values, or `auto` for x* + (r/2)·d
    /// with a seeded random unit direction d.
    #[arg(long, default_value = "auto")]
    pub x0: String,
    /// Multiplies the certified radius used by `--x0 auto`.
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub radius_scale: f64,
    /// Seed for the random start directions.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Multiplies the certified radius when placing start points; checks
    /// still use the certified radius.
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub radius_scale: f64,
    /// Seed for the random start directions.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive and finite, got {v}"))
    }
}

/// Parses `--x0` values: `auto` or comma-separated numbers.
pub fn parse_x0(s: &str) -> Result<Option<Vec<f64>>, String> {
    if s.trim() == "auto" {
        return Ok(None);
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("--x0: `{}` is not a number", part.trim()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}
