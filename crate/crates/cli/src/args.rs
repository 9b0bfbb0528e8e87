use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hydrowave::Rect;

#[derive(Debug, Parser)]
#[command(
    name = "hydrowave",
    version,
    about = "Exact solutions of variable-speed wave equations and the p-system"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a closed-form family against its wave equation.
    Verify(VerifyArgs),
    /// Check that two densities generate commuting flows.
    Commute(CommuteArgs),
    /// Invert the hodograph map along an x-grid at fixed time.
    Hodograph(HodographArgs),
    /// Evolve the p-system with a conservative scheme.
    Evolve(EvolveArgs),
    /// Build a recursive separable tower and check each level.
    Nutku(NutkuArgs),
    /// Check the compatibility conditions of a differential constraint.
    ConstraintCheck(ConstraintArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    #[value(alias = "json", alias = "json-lines")]
    Jsonl,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value file supplying defaults for this command's flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseKind {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    General,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    #[arg(long, value_enum)]
    pub case: CaseKind,
    #[arg(long, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    /// A(η) for the general family.
    #[arg(long)]
    pub a: Option<String>,
    /// B(η) for the general family.
    #[arg(long)]
    pub b: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long)]
    pub theta1: String,
    #[arg(long, default_value = "0")]
    pub theta2: String,
    #[arg(long, default_value = "u=1:2,v=1:2")]
    pub domain: Rect,
    #[arg(long, default_value_t = 30, value_parser = grid_size)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CommuteArgs {
    /// Density spec, e.g. `catalog:t2,k0=1` or `u:s^4`.
    #[arg(long)]
    pub h: String,
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value = "u=1:2,v=1:2")]
    pub domain: Rect,
    #[arg(long, default_value_t = 30, value_parser = grid_size)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    /// Rows of the worst-point table in the report.
    #[arg(long, default_value_t = 10)]
    pub rows: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HodographArgs {
    /// Pressure spec, e.g. `case2:k0=1`.
    #[arg(long)]
    pub pressure: String,
    /// Density spec; overrides the theta flags.
    #[arg(long)]
    pub density: Option<String>,
    #[arg(long)]
    pub theta1: Option<String>,
    #[arg(long)]
    pub theta2: Option<String>,
    /// Rectangle of the (u, v) plane the inversion may use.
    #[arg(long, default_value = "u=-10:10,v=0.1:10")]
    pub rect: Rect,
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    /// `a:b:n`, n points spanning [a, b].
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// `u,v` starting guess for the first cell; found by a seed scan when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Time offset of the p-system residual check.
    #[arg(long, default_value_t = 1e-4, value_parser = positive)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub sym_tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub pressure: String,
    /// A CSV with columns x,u,v[,flag] or `preset:wavy[,n=..,amp=..,u0=..,v0=..,length=..]`.
    #[arg(long)]
    pub init: String,
    #[arg(long, default_value = "lw")]
    pub scheme: String,
    #[arg(long, default_value_t = 0.5, value_parser = positive)]
    pub cfl: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub tend: f64,
    /// Density spec whose integral is tracked; repeatable.
    #[arg(long)]
    pub monitor: Vec<String>,
    /// Write every k-th step to the CSV (the final step is always written).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub every: u64,
    /// Fail when a monitor's relative drift per unit time exceeds this.
    #[arg(long, value_parser = positive)]
    pub drift_tol: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NutkuArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub beta: String,
    #[arg(long, default_value = "s")]
    pub f0: String,
    #[arg(long, default_value = "s")]
    pub g0: String,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub levels: u64,
    #[arg(long, default_value = "u=1:2,v=1:2")]
    pub domain: Rect,
    #[arg(long, default_value_t = 12, value_parser = grid_size)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// C(η) in g = r (A f + C).
    #[arg(long, default_value = "0")]
    pub c: String,
    #[arg(long, default_value = "u=1:2,v=1:2")]
    pub domain: Rect,
    #[arg(long, default_value_t = 12, value_parser = grid_size)]
    pub grid: usize,
    /// Comma-separated f values probed at every grid point.
    #[arg(long, default_value = "-1,0.5,2", allow_hyphen_values = true)]
    pub fvals: String,
    /// Shift λ by this amount before checking.
    #[arg(long, allow_negative_numbers = true)]
    pub perturb: Option<f64>,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn grid_size(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if n >= 2 {
        Ok(n)
    } else {
        Err(format!("grid needs at least 2 points per side, got {n}"))
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Verify(a) => &a.common,
            Command::Commute(a) => &a.common,
            Command::Hodograph(a) => &a.common,
            Command::Evolve(a) => &a.common,
            Command::Nutku(a) => &a.common,
            Command::ConstraintCheck(a) => &a.common,
        }
    }
}
