//! Command-line front door: problem ingestion, run orchestration, and
//! trace/certificate export.
//!
//! Every run is deterministic for a fixed configuration (probe-based
//! estimates and the measure demo take an explicit seed), artifacts land in
//! a directory named by a hash of the configuration, and failures exit with
//! distinct codes: 2 parse, 3 precondition, 4 resonance, 5 convergence.

use clap::{Args, Parser, Subcommand};
use echelon::io::{ErrorEnvelope, FieldLiteral, HamiltonianLiteral, SeriesLiteral};
use echelon::{Coeff, Error, ExactC, Frequency, Schedule, Strategy};
use num_complex::Complex64;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

mod run;

#[derive(Parser)]
#[command(name = "echelon", version, about = "scaled-norm normal-form toolkit")]
struct Cli {
    /// Output directory (default: $ECHELON_OUT or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linearize a vector field with diagonal linear part.
    Linearize(LinearizeArgs),
    /// Reduce a function germ to its quadratic part.
    Morse(MorseArgs),
    /// Transversal KAM step on the deformed torus Hamiltonian.
    KamStep(KamArgs),
    /// Symplectic normal-form step at a Morse critical point.
    SingularKam(SingularArgs),
    /// Scan small divisors and emit a (C,τ) certificate.
    Diophantine(DiophantineArgs),
    /// Tabulate Siegel divisors (j,λ) − λ_i.
    Divisors(DivisorsArgs),
    /// Convergent and non-convergent infinite-product certificates.
    ProductDemo(ProductDemoArgs),
    /// Monte-Carlo fraction of diophantine frequencies per constant.
    MeasureDemo(MeasureDemoArgs),
}

#[derive(Args)]
struct LinearizeArgs {
    /// Vector-field file: {"components":[series,…]}.
    #[arg(long)]
    field: PathBuf,
    /// Jet order of the conjugacy.
    #[arg(long)]
    cutoff: u64,
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[arg(long, default_value = "kolmogorov")]
    strategy: String,
    /// Exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Base scale of the halving schedule.
    #[arg(long, default_value_t = 0.3)]
    scale: f64,
    /// Resonance tolerance for the divisor scan.
    #[arg(long, default_value_t = 1e-12)]
    res_tol: f64,
}

#[derive(Args)]
struct MorseArgs {
    /// Function-germ file: a series literal.
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long, default_value_t = 3)]
    steps: usize,
    #[arg(long, default_value = "kolmogorov")]
    strategy: String,
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 0.3)]
    scale: f64,
}

#[derive(Args)]
struct KamArgs {
    /// Hamiltonian file with named slots {"angles":n,"actions":n,"t":1}.
    #[arg(long)]
    ham: PathBuf,
    /// Fourier cutoff override (defaults to the file's cap).
    #[arg(long)]
    cutoff: Option<u64>,
    /// t-grading cap override.
    #[arg(long = "t-order")]
    t_order: Option<u64>,
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Validate reality symmetry on input and output.
    #[arg(long)]
    real: bool,
    #[arg(long, default_value_t = 1)]
    tau: u32,
    #[arg(long, default_value_t = 0.2)]
    scale: f64,
}

#[derive(Args)]
struct SingularArgs {
    /// Hamiltonian germ on (q_1..q_n, p_1..p_n): a series literal.
    #[arg(long)]
    ham: PathBuf,
    #[arg(long, default_value_t = 4)]
    steps: usize,
    #[arg(long, default_value_t = 0.2)]
    scale: f64,
    #[arg(long, default_value_t = 1e-12)]
    res_tol: f64,
}

#[derive(Args)]
struct DiophantineArgs {
    /// Comma-separated frequency entries (rationals allowed with --exact).
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    tau: u32,
    #[arg(long)]
    cutoff: u64,
    /// Exact rational scan (entries like 3/2 or integers).
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct DivisorsArgs {
    /// Tabulate the Siegel divisors (the only table implemented).
    #[arg(long)]
    siegel: bool,
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    cutoff: u64,
    /// Resonance tolerance (default 1e-12·max|λ|).
    #[arg(long)]
    res_tol: Option<f64>,
}

#[derive(Args)]
struct ProductDemoArgs {
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    #[arg(long, default_value_t = 8)]
    terms: usize,
}

#[derive(Args)]
struct MeasureDemoArgs {
    #[arg(long, default_value_t = 2)]
    tau: u32,
    /// Comma-separated constants to test.
    #[arg(long = "c-grid", default_value = "1,0.1,0.01,0.001")]
    c_grid: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    cutoff: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_root = cli
        .out
        .or_else(|| std::env::var_os("ECHELON_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match dispatch(&cli.command, &out_root) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut env = ErrorEnvelope::from_error(&e);
            if is_parse(&e) {
                env.kind = "parse".into();
            }
            eprintln!("{}", serde_json::to_string(&env).unwrap());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if is_parse(e) {
        return 2;
    }
    match e.kind() {
        "resonance" => 4,
        "convergence" => 5,
        _ => 3,
    }
}

fn dispatch(cmd: &Command, out_root: &Path) -> Result<PathBuf, Error> {
    match cmd {
        Command::Linearize(a) => run::linearize(a, out_root),
        Command::Morse(a) => run::morse(a, out_root),
        Command::KamStep(a) => run::kam_step(a, out_root),
        Command::SingularKam(a) => run::singular(a, out_root),
        Command::Diophantine(a) => run::diophantine(a, out_root),
        Command::Divisors(a) => run::divisors(a, out_root),
        Command::ProductDemo(a) => run::product_demo(a, out_root),
        Command::MeasureDemo(a) => run::measure_demo(a, out_root),
    }
}

// ---- shared plumbing used by the run module ----

pub(crate) fn parse_error(msg: impl std::fmt::Display) -> Error {
    Error::Precondition(format!("parse: {msg}"))
}

pub(crate) fn is_parse(e: &Error) -> bool {
    matches!(e, Error::Precondition(m) if m.starts_with("parse: "))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(parse_error)?;
    serde_json::from_str(&text).map_err(parse_error)
}

/// FNV-1a over the debug-rendered configuration: stable names for artifact
/// directories, independent of platform and library versions.
pub(crate) fn config_hash(parts: &[String]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for p in parts {
        for b in p.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub(crate) fn artifact_dir(
    out_root: &Path,
    command: &str,
    parts: &[String],
) -> Result<PathBuf, Error> {
    let dir = out_root.join(format!("{command}-{}", config_hash(parts)));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Precondition(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub(crate) fn write_artifact<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Precondition(format!("serialize {name}: {e}")))?;
    std::fs::write(dir.join(name), text)
        .map_err(|e| Error::Precondition(format!("write {name}: {e}")))
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    std::fs::write(dir.join(name), text)
        .map_err(|e| Error::Precondition(format!("write {name}: {e}")))
}

pub(crate) fn parse_lambda(text: &str) -> Result<Frequency, Error> {
    let entries: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let entries = entries.map_err(parse_error)?;
    if entries.is_empty() {
        return Err(parse_error("frequency must have at least one entry"));
    }
    Ok(Frequency::real(&entries))
}

pub(crate) fn parse_lambda_exact(text: &str) -> Result<Vec<num_rational::BigRational>, Error> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    text.split(',')
        .map(|p| {
            let p = p.trim();
            if let Some((num, den)) = p.split_once('/') {
                let n: BigInt = num.trim().parse().map_err(parse_error)?;
                let d: BigInt = den.trim().parse().map_err(parse_error)?;
                if d == BigInt::from(0) {
                    return Err(parse_error("zero denominator"));
                }
                Ok(BigRational::new(n, d))
            } else {
                let n: BigInt = p.parse().map_err(parse_error)?;
                Ok(BigRational::from_integer(n))
            }
        })
        .collect()
}

pub(crate) fn parse_strategy(text: &str) -> Result<Strategy, Error> {
    match text {
        "kolmogorov" => Ok(Strategy::Kolmogorov),
        "newton" => Ok(Strategy::Newton),
        "picard" => Ok(Strategy::Picard),
        other => Err(parse_error(format!("unknown strategy {other}"))),
    }
}

pub(crate) fn halving(scale: f64) -> Schedule {
    Schedule::Halving { s: scale, k: 0 }
}

pub(crate) fn thirds(scale: f64) -> Schedule {
    Schedule::Thirds { s: scale, k: 0, l: 0 }
}

/// Series ingestion for both coefficient modes.
pub(crate) fn load_series<C: Coeff>(path: &Path) -> Result<echelon::TruncatedSeries<C>, Error> {
    let lit: SeriesLiteral = read_json(path)?;
    lit.to_series()
}

pub(crate) fn load_field<C: Coeff>(path: &Path) -> Result<echelon::VectorField<C>, Error> {
    let lit: FieldLiteral = read_json(path)?;
    lit.to_field()
}

pub(crate) fn load_hamiltonian<C: Coeff>(path: &Path) -> Result<echelon::Hamiltonian<C>, Error> {
    let lit: HamiltonianLiteral = read_json(path)?;
    lit.to_hamiltonian()
}

pub(crate) type C64 = Complex64;
pub(crate) type CEx = ExactC;
