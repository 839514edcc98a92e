//! `padicell`: batch front end. Every artifact carries a `verification`
//! block; the exit status is 0 when it passes, 1 when it fails, 2 for
//! unsupported or malformed input and 3 for I/O errors.

mod jobs;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "padicell", version, about = "Cell decomposition and preparation over Q_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Params {
    #[arg(long, global = true, default_value_t = 5)]
    pub prime: u32,
    /// Digits carried by p-adic arithmetic.
    #[arg(long = "work-prec", global = true, default_value_t = 16)]
    pub work_prec: u32,
    /// Unit level for preparation.
    #[arg(long, global = true, default_value_t = 1)]
    pub n: u32,
    /// Power the normal form must be a multiple of.
    #[arg(long, global = true)]
    pub power: Option<u32>,
    /// Valuation window of the verification sample.
    #[arg(long, global = true, default_value_t = 4)]
    pub window: u32,
    /// Unit digits of the verification sample.
    #[arg(long, global = true, default_value_t = 6)]
    pub digits: u32,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized re-checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a univariate formula into cells.
    Decompose { input: String },
    /// Prepare a univariate term, optionally as an e-th root.
    Prepare {
        input: String,
        #[arg(long, default_value_t = 1)]
        root: u32,
    },
    /// Sections of the cells of a formula.
    Skolem { input: String },
    /// Translate a Presburger cell (JSON) into ring conditions.
    Translate { input: String },
    /// Least norm of a term over a closed bounded domain.
    Evpmin {
        input: String,
        /// Formula describing the domain.
        #[arg(long)]
        domain: String,
    },
    /// Re-run the verification of an artifact.
    Verify { input: String },
}

enum Failure {
    Input(padicell::Error),
    Io(String),
}

impl From<padicell::Error> for Failure {
    fn from(e: padicell::Error) -> Self {
        Failure::Input(e)
    }
}

/// `-` reads standard input, `@path` reads a file, anything else is the
/// text itself.
fn read_input(s: &str) -> Result<String, Failure> {
    if s == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(|e| Failure::Io(e.to_string()))?;
        return Ok(buf.trim().to_string());
    }
    if let Some(path) = s.strip_prefix('@') {
        return std::fs::read_to_string(path).map(|t| t.trim().to_string()).map_err(|e| Failure::Io(format!("{path}: {e}")));
    }
    Ok(s.to_string())
}

fn error_kind(e: &padicell::Error) -> &'static str {
    use padicell::Error::*;
    match e {
        Config(_) => "Config",
        InsufficientPrecision { .. } => "InsufficientPrecision",
        Domain(_) => "Domain",
        DivisionByZero => "DivisionByZero",
        Syntax { .. } => "Syntax",
        Arity(_) => "Arity",
        InvalidCoset { .. } => "InvalidCoset",
        UnsupportedSplitting(_) => "UnsupportedSplitting",
        RootExtraction(_) => "RootExtraction",
        EmptyCell => "EmptyCell",
        TypeZeroCell => "TypeZeroCell",
        Unbounded => "Unbounded",
        Empty => "Empty",
        VanishingFunction(_) => "VanishingFunction",
        UnboundedDomain(_) => "UnboundedDomain",
        SizeCap { .. } => "SizeCap",
        Internal(_) => "Internal",
    }
}

fn run(cli: &Cli) -> Result<(Value, bool), Failure> {
    let p = &cli.params;
    let (body, ok) = match &cli.command {
        Command::Decompose { input } => jobs::decompose(&read_input(input)?, p)?,
        Command::Prepare { input, root } => jobs::prepare(&read_input(input)?, *root, p)?,
        Command::Skolem { input } => jobs::skolem(&read_input(input)?, p)?,
        Command::Translate { input } => jobs::translate_cell(&read_input(input)?, p)?,
        Command::Evpmin { input, domain } => jobs::evpmin(&read_input(input)?, &read_input(domain)?, p)?,
        Command::Verify { input } => {
            let text = read_input(input)?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(padicell::Error::Syntax { pos: e.column(), msg: e.to_string() }))?;
            jobs::verify(&v, p)?
        }
    };
    Ok((body, ok))
}

fn emit(v: &Value, out: &Option<PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (v, code) = match run(&cli) {
        Ok((v, ok)) => (v, if ok { 0 } else { 1 }),
        Err(Failure::Input(e)) => (json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } }), 2),
        Err(Failure::Io(msg)) => {
            eprintln!("padicell: {msg}");
            return ExitCode::from(3);
        }
    };
    if let Err(msg) = emit(&v, &cli.params.out) {
        eprintln!("padicell: {msg}");
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
