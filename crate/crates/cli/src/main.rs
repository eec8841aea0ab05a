//! `branchlab` command line: toy solves, constructions, transport, norms,
//! dimension estimates, parameter sweeps and invariant checks.

mod commands;
mod output;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Thread count for the work pool; unset means machine parallelism.
const THREADS_ENV: &str = "BRANCHLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "branchlab", version, about = "Branched transport experiments on the flat torus")]
pub struct Cli {
    /// Seed for every random choice; recorded in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimize the 1D toy energy.
    SolveToy {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// Build a competitor and certify its energy bound.
    Construct {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        r: Option<f64>,
        /// Atoms per random endpoint measure (dyadic, block).
        #[arg(long, default_value_t = 10)]
        atoms: usize,
        /// Endpoint measure files (JSON) replacing the random ones.
        #[arg(long)]
        mu_minus: Option<PathBuf>,
        #[arg(long)]
        mu_plus: Option<PathBuf>,
    },
    /// Optimal periodic transport between two measure files.
    Ot {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
    },
    /// Negative Sobolev norms of a measure (minus Lebesgue) or a Fourier table.
    Norm {
        #[arg(long, conflicts_with = "table")]
        measure: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        k_max: usize,
    },
    /// Box-counting dimension of a measure file or of the nonuniform trace.
    Dim {
        #[arg(long, conflicts_with = "nonuniform")]
        measure: Option<PathBuf>,
        /// Use the cell-center trace of the nonuniform construction.
        #[arg(long)]
        nonuniform: bool,
        #[arg(long = "T", default_value_t = 1e-3)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Evaluate a command over log-spaced parameter values and fit the slope.
    Sweep {
        #[arg(long, value_enum)]
        command: SweepCommand,
        #[arg(long, value_enum)]
        vary: Vary,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "T", default_value_t = 1e-3)]
        horizon: f64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// Run the invariant checks of one module or of all of them.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Uniform,
    Nonuniform,
    Dyadic,
    Block,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepCommand {
    SolveToy,
    Uniform,
    Nonuniform,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vary {
    #[value(name = "T")]
    Horizon,
    Lambda,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Model,
    Transport,
    Sobolev,
    Constructions,
    Toy1d,
    Analysis,
}

/// Why a run failed, mapped to the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Certification(String),
}

impl From<branchlab::Error> for Failure {
    fn from(e: branchlab::Error) -> Self {
        match e {
            branchlab::Error::CertificationFailed(m) => Failure::Certification(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(Failure::Usage(format!("{THREADS_ENV} must be a positive integer")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Certification(m)) => {
            eprintln!("certification failed: {m}");
            ExitCode::from(2)
        }
    }
}
