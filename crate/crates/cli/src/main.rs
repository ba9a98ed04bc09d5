use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// Exact p-spin intersection numbers and their numerical cross-checks.
#[derive(Parser, Debug)]
#[command(name = "pspin", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate intersection numbers with one or two marked points.
    Intersect(IntersectArgs),
    /// Check an identity or run a numerical oracle; exit 1 if anything fails.
    Verify(VerifyArgs),
    /// Density of states and its affine comparison with the coset black hole.
    Density(DensityArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Real,
    Contour,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the result to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Directory for result files when --output is absent.
    #[arg(long, env = "PSPIN_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IntersectArgs {
    /// Integer p (negative allowed for one point) or "symbolic".
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    #[arg(long)]
    pub genus: u32,
    #[arg(long, default_value_t = 2)]
    pub points: u32,
    #[arg(long, value_enum, default_value = "real")]
    pub mode: Mode,
    /// Compare against the bundled reference values and report drift.
    #[arg(long)]
    pub golden: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    String,
    Dilaton,
    Selection,
    Cancellation,
    AiryQuad,
    Mc,
    Binet,
    Largep,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: Check,
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, default_value_t = 2)]
    pub genus: u32,
    /// Argument of the digamma identity.
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,
    /// Comma-separated values of a for the moment quadrature.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.8, 1.0])]
    pub a: Vec<f64>,
    /// Comma-separated source eigenvalues for the Monte Carlo check.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![1.0, -1.0, 2.0, -2.0])]
    pub eigenvalues: Vec<f64>,
    /// Comma-separated insertion points s (one or two).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = vec![0.3])]
    pub s: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub e_min: f64,
    #[arg(long, default_value_t = 50.0)]
    pub e_max: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Level k' of the negative branch, as a decimal or a/b.
    #[arg(long)]
    pub central_charge: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Intersect(a) => commands::intersect(a),
        Command::Verify(a) => commands::verify(a),
        Command::Density(a) => commands::density(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("pspin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
