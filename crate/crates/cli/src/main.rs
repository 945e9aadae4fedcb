mod commands;
mod manifest;
mod report;
mod scalar;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orbitrips::{ActionProperty, ComplexKind, Convention, Uniqueness};

use scalar::parse_scalar;

/// Quotient metric spaces, action thresholds, quotient-complex isomorphism
/// certificates and persistent homology.
#[derive(Parser)]
#[command(name = "orbitrips", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sample space (and optionally its standard group action).
    Generate(GenerateArgs),
    /// Build the quotient of a space by a group action.
    Quotient(QuotientArgs),
    /// Find the largest critical scale at which an action property holds.
    Thresholds(ThresholdArgs),
    /// Check one action property at one scale.
    Check(CheckArgs),
    /// Build a Vietoris–Rips or Čech complex.
    Complex(ComplexArgs),
    /// Compare the complex of the quotient with the quotient of the complex.
    IsoCheck(IsoArgs),
    /// Vietoris–Rips barcode over Z/2.
    Persistence(PersistenceArgs),
    /// Betti numbers of a Vietoris–Rips complex at one scale.
    Betti(BettiArgs),
    /// Run the worked-example suite and print a summary.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Circle,
    Sphere,
    Torus,
    SixCircles,
    TwelveCircles,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    shape: Shape,
    /// Points on the circle.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "1", value_parser = parse_scalar)]
    circumference: f64,
    /// Sphere dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Sphere sample size (before antipodal pairing) or points per circle.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    antipodal: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Torus grid side.
    #[arg(long)]
    k: Option<usize>,
    /// Circle rotation used for `--action-out`, in steps; defaults to `n / 2`.
    #[arg(long)]
    shift: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the shape's standard action.
    #[arg(long)]
    action_out: Option<PathBuf>,
}

#[derive(Args)]
struct QuotientArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    action: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Distance,
    Ball,
    Diameter,
    Nerve,
}

impl From<PropertyArg> for ActionProperty {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Distance => ActionProperty::Distance,
            PropertyArg::Ball => ActionProperty::Ball,
            PropertyArg::Diameter => ActionProperty::Diameter,
            PropertyArg::Nerve => ActionProperty::Nerve,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ComplexArg {
    Vr,
    Cech,
}

impl From<ComplexArg> for ComplexKind {
    fn from(k: ComplexArg) -> Self {
        match k {
            ComplexArg::Vr => ComplexKind::Vr,
            ComplexArg::Cech => ComplexKind::Cech,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CmpArg {
    Leq,
    Lt,
}

impl From<CmpArg> for Convention {
    fn from(c: CmpArg) -> Self {
        match c {
            CmpArg::Leq => Convention::Leq,
            CmpArg::Lt => Convention::Lt,
        }
    }
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    /// Count distinct lifted point sets instead of element tuples.
    #[arg(long)]
    set_uniqueness: bool,
}

impl LiftArgs {
    fn uniqueness(&self) -> Uniqueness {
        if self.set_uniqueness {
            Uniqueness::Set
        } else {
            Uniqueness::Tuple
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    action: PathBuf,
    #[arg(long, value_enum)]
    kind: PropertyArg,
    #[command(flatten)]
    lift: LiftArgs,
    /// Check every critical value and verify monotonicity.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    action: PathBuf,
    #[arg(long, value_enum)]
    kind: PropertyArg,
    #[arg(long, value_parser = parse_scalar)]
    r: f64,
    #[command(flatten)]
    lift: LiftArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_parser = parse_scalar)]
    r: f64,
    #[arg(long, value_enum, default_value = "vr")]
    kind: ComplexArg,
    #[arg(long, value_enum, default_value = "leq")]
    cmp: CmpArg,
    #[arg(long, default_value_t = 3)]
    dim_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the Vietoris–Rips filtration up to `r` as TSV.
    #[arg(long)]
    filtration: Option<PathBuf>,
}

#[derive(Args)]
struct IsoArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    action: PathBuf,
    #[arg(long, value_parser = parse_scalar)]
    r: f64,
    #[arg(long, value_enum, default_value = "vr")]
    kind: ComplexArg,
    #[arg(long, value_enum, default_value = "leq")]
    cmp: CmpArg,
    #[arg(long, default_value_t = 3)]
    dim_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BarcodeFormat {
    Tsv,
    Json,
}

#[derive(Args)]
struct PersistenceArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, default_value_t = 3)]
    dim_cap: usize,
    /// Truncate the filtration at this scale.
    #[arg(long, value_parser = parse_scalar)]
    max_scale: Option<f64>,
    #[arg(long, value_enum, default_value = "tsv")]
    format: BarcodeFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BettiArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_parser = parse_scalar)]
    r: f64,
    #[arg(long, value_enum, default_value = "leq")]
    cmp: CmpArg,
    #[arg(long, default_value_t = 3)]
    dim_cap: usize,
    /// Also compute with the dense oracle and require agreement.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A run that did not complete normally, with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments (exit 2).
    Usage(String),
    /// Invalid input, or a checked property that does not hold (exit 3).
    Invalid(String),
    /// Simplex budget or instance size exceeded (exit 4).
    Budget(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Budget(m) | Failure::Io(m) => m,
        }
    }
}

impl From<orbitrips::Error> for Failure {
    fn from(e: orbitrips::Error) -> Self {
        use orbitrips::Error as E;
        match e {
            E::BudgetExceeded { .. } => Failure::Budget(format!("{e} (raise ORBITRIPS_BUDGET or lower --dim-cap)")),
            E::InstanceTooLarge { .. } => Failure::Budget(e.to_string()),
            E::NotIsometric { .. } => Failure::Invalid(format!("{e}, Definition isometric action")),
            E::NotSimplicial { .. } => Failure::Invalid(format!("{e}, Definition induced simplicial action")),
            E::InvalidKMax => Failure::Usage(e.to_string()),
            E::Io(_) => Failure::Io(e.to_string()),
            E::Inconsistent(_) => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (name, result) = match cli.command {
        Command::Generate(a) => ("generate", commands::generate(a)),
        Command::Quotient(a) => ("quotient", commands::quotient(a)),
        Command::Thresholds(a) => ("thresholds", commands::thresholds(a)),
        Command::Check(a) => ("check", commands::check(a)),
        Command::Complex(a) => ("complex", commands::complex(a)),
        Command::IsoCheck(a) => ("iso-check", commands::iso_check(a)),
        Command::Persistence(a) => ("persistence", commands::persistence(a)),
        Command::Betti(a) => ("betti", commands::betti(a)),
        Command::Report(a) => ("report", report::run(a)),
    };
    eprintln!("orbitrips {name}: wall time {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
