//! `adheat`: evaluate kernels, run the verification suites and launch
//! simulations.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure.

mod config;
mod eval;
mod output;
mod parse;
mod simulate;
mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<adheat::Error> for CliError {
    fn from(e: adheat::Error) -> Self {
        if e.is_parameter_error() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "adheat", version, about = "Heat kernels, flows and Brownian motion of the a-deformed Laplacian")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Deformation parameter a > max(0, 2 - N).
    #[arg(long, global = true, default_value_t = 1.0)]
    a: f64,
    /// Dimension N >= 2.
    #[arg(long = "N", global = true, default_value_t = 3)]
    n: usize,
    /// Truncation tolerance of the 𝓘 series when it is forced.
    #[arg(long, global = true, default_value_t = 1e-15)]
    tol: f64,
    /// Gauss–Laguerre nodes of the flow rule.
    #[arg(long, global = true, default_value_t = 96)]
    n_rad: usize,
    /// Gegenbauer nodes of the flow rule.
    #[arg(long, global = true, default_value_t = 64)]
    n_ang: usize,
    /// Points per polar angle on the sphere orthogonal to x.
    #[arg(long, global = true, default_value_t = 12)]
    n_sub: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; defaults to $ADHEAT_OUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json; verify reports default to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate 𝓘 or one of the kernels at given points.
    Eval {
        #[command(subcommand)]
        subject: eval::Subject,
    },
    /// Run a verification suite and report every check.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
        /// Reduced grids and path counts.
        #[arg(long)]
        quick: bool,
    },
    /// Monte Carlo runs of the deformed Brownian motion.
    Simulate {
        #[command(subcommand)]
        kind: simulate::Kind,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    let default_format = if matches!(cli.cmd, Cmd::Verify { .. }) { Format::Json } else { Format::Csv };
    let mut cfg = RunConfig {
        command: String::new(),
        a: c.a,
        n: c.n,
        tol: c.tol,
        n_rad: c.n_rad,
        n_ang: c.n_ang,
        n_sub: c.n_sub,
        seed: c.seed,
        output: c.out.clone(),
        format: c.format.unwrap_or(default_format),
        args: BTreeMap::new(),
    };
    match &cli.cmd {
        Cmd::Eval { subject } => eval::run(&mut cfg, subject),
        Cmd::Verify { suite, quick } => verify::run(&mut cfg, *suite, *quick),
        Cmd::Simulate { kind } => simulate::run(&mut cfg, kind),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adheat: {e}");
            ExitCode::from(e.code())
        }
    }
}
