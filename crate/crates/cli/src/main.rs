//! `strata`: batch driver for the stratification engine.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "strata", version, about = "Jordan-type strata of bound quiver algebras with loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Print wall-clock time to stderr.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every stratum of rep(A, d) for one dimension vector.
    Strata(StrataArgs),
    /// Search a range of dimension vectors for reducibility certificates.
    ReduceScan(ScanArgs),
    /// Compare the closed-form codimensions with computed ranks.
    VerifyFormulas(FormulaArgs),
    /// Brute-force point counts over F_q and the per-stratum count identity.
    OracleCount(OracleArgs),
    /// Print the presentation of a named family.
    Family(FamilyArgs),
    /// Identify which named family a presentation belongs to.
    Recognize(AlgebraArg),
    /// Dump the linear system of one Jordan assignment.
    System(SystemArgs),
}

#[derive(Args, Debug)]
pub struct AlgebraArg {
    /// Presentation file.
    #[arg(long)]
    pub algebra: PathBuf,
}

#[derive(Args, Debug)]
pub struct StrataArgs {
    #[command(flatten)]
    pub algebra: AlgebraArg,
    /// Dimension vector, e.g. `2,2`.
    #[arg(long)]
    pub dim: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    /// Fail if any certificate is found.
    None,
    /// Fail unless at least one certificate is found.
    Some,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub algebra: AlgebraArg,
    /// A single dimension vector.
    #[arg(long, conflicts_with = "max_total")]
    pub dim: Option<String>,
    /// All dimension vectors with total at most N, in lexicographic order.
    #[arg(long, required_unless_present = "dim")]
    pub max_total: Option<usize>,
    /// Skip vectors with total below N.
    #[arg(long, default_value_t = 0)]
    pub min_total: usize,
    /// Largest number of Jordan assignments scanned per vector.
    #[arg(long, default_value_t = strata_core::strata::DEFAULT_SCAN_CAP)]
    pub cap: usize,
    /// Report every certificate, not just the first.
    #[arg(long)]
    pub all: bool,
    /// Exit with status 1 when the outcome contradicts this.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
}

#[derive(Args, Debug)]
pub struct FormulaArgs {
    /// Restrict to one item.
    #[arg(long)]
    pub item: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    /// A rational such as `2`, `-1` or `1/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Number of arrows.
    #[arg(long)]
    pub h: Option<usize>,
    /// Largest p and q in the sweep.
    #[arg(long, default_value_t = 6)]
    pub max: usize,
    /// Also sweep q > p where the item allows it.
    #[arg(long)]
    pub q_above_p: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub algebra: AlgebraArg,
    #[arg(long)]
    pub dim: String,
    /// Field sizes, e.g. `2,3`. Primes only.
    #[arg(long, default_value = "2")]
    pub q: String,
    /// Largest number of enumerated points per field.
    #[arg(long, default_value_t = strata_core::ff_oracle::DEFAULT_POINT_CAP)]
    pub cap: u64,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// `A(h,m0,m1,n)`, `A'(h,m0,m1)` or `K[X]/(X^m)`.
    #[arg(long)]
    pub tag: String,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SystemArgs {
    #[command(flatten)]
    pub algebra: AlgebraArg,
    /// Jordan assignment, e.g. `2,1;2`.
    #[arg(long)]
    pub assignment: String,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    /// A mismatch or a failed expectation.
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let result = match &cli.command {
        Command::Strata(a) => commands::strata(a, cli.format),
        Command::ReduceScan(a) => commands::reduce_scan(a, cli.format),
        Command::VerifyFormulas(a) => commands::verify_formulas(a, cli.format),
        Command::OracleCount(a) => commands::oracle_count(a, cli.format),
        Command::Family(a) => commands::family(a),
        Command::Recognize(a) => commands::recognize(a),
        Command::System(a) => commands::system(a),
    };
    if cli.timing {
        eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
