//! `hwe-equiv`: equivalence tests for Hardy-Weinberg equilibrium.
//!
//! Exit codes:
//!
//! * `0` success; for `test`, the first listed test rejected H₀, i.e.
//!   the sample is shown to be close to HWE.
//! * `1` `test` only: the first listed test did not reject.
//! * `2` any error, including invalid arguments.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hwe_equiv::{CalibrationKind, TestKind};

#[derive(Parser)]
#[command(
    name = "hwe-equiv",
    version,
    about = "Equivalence tests for Hardy-Weinberg equilibrium"
)]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test H₀ "distance ≥ ε" against H₁ "distance < ε".
    Test(TestArgs),
    /// Smallest tolerance at which each test rejects.
    MinEps(MinEpsArgs),
    /// Simulated power at HWE, as a grid over ε or a sensitivity study.
    Power(PowerArgs),
    /// Simulated type-I error at random boundary points of H₀.
    Boundary(BoundaryArgs),
    /// Print the built-in data sets.
    Datasets {
        /// Print only this table, in the input format.
        id: Option<u8>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Genotype table file, or `builtin:1`, `builtin:2`, `builtin:3`.
    #[arg(long)]
    data: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    C,
    M,
    Both,
}

impl KindArg {
    fn kinds(self) -> Vec<TestKind> {
        match self {
            KindArg::C => vec![TestKind::Conditional],
            KindArg::M => vec![TestKind::MinimumDistance],
            KindArg::Both => TestKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CalibArg {
    Asym,
    Boot,
    Both,
}

impl CalibArg {
    fn calibrations(self) -> Vec<CalibrationKind> {
        match self {
            CalibArg::Asym => vec![CalibrationKind::Asymptotic],
            CalibArg::Boot => vec![CalibrationKind::Bootstrap],
            CalibArg::Both => CalibrationKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Args)]
struct FormatArgs {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

impl FormatArgs {
    fn format(&self) -> Format {
        match (self.json, self.csv) {
            (true, _) => Format::Json,
            (_, true) => Format::Csv,
            _ => Format::Human,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "both")]
    calib: CalibArg,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 500)]
    b: usize,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct MinEpsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long = "B", default_value_t = 500)]
    b: usize,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "both")]
    calib: CalibArg,
    /// Monte-Carlo samples per rejection rate.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Bootstrap replicates inside each simulated test.
    #[arg(long = "B", default_value_t = hwe_equiv::simulation::STUDY_BOOTSTRAP_REPLICATES)]
    b: usize,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    study: StudyArgs,
    /// Comma-separated tolerances for a power grid at e(p_n).
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "eps"
    )]
    eps_list: Vec<f64>,
    /// Tolerance for a sensitivity study over resampled HWE points.
    #[arg(
        long,
        allow_negative_numbers = true,
        required_unless_present = "eps_list"
    )]
    eps: Option<f64>,
    /// Evaluation points of the sensitivity study.
    #[arg(long, default_value_t = 100)]
    points: usize,
}

#[derive(Args)]
struct BoundaryArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    /// Number of random boundary points.
    #[arg(long, default_value_t = 100)]
    points: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = commands::configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
