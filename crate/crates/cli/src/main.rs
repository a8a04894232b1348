//! `lambshift`: spectra, degeneracies and Lamb-shift statistics of the
//! Tavis–Cummings model from the command line.
//!
//! Eigenvalues are in units of `g0`, DOS energies in units of `ω0`, and the
//! only physical parameter is the ratio `ω0/g0`.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Rendered};

#[derive(Debug, Parser)]
#[command(
    name = "lambshift",
    version,
    about = "Tavis–Cummings (j, k) subspace analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, env = "LAMBSHIFT_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of one coupling block L(j, k).
    Spectrum {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        twice_j: u32,
        #[arg(long)]
        k: u64,
    },
    /// Multiplicities d_j of every allowed j.
    Degeneracy {
        #[arg(long)]
        n: u32,
    },
    /// Maximally degenerate j, exact and asymptotic.
    Jstar {
        #[arg(long)]
        n: u32,
    },
    /// Degeneracy-averaged variance for k = 0..=k-max.
    VarianceScan {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k_max: u64,
        /// Keep only the lowest-j blocks holding this fraction of each manifold.
        #[arg(long)]
        support_mass: Option<f64>,
    },
    /// Least-squares slope of the variance over [k-min, k-max].
    Slope {
        #[arg(long)]
        n: u32,
        /// Default: n.
        #[arg(long)]
        k_min: Option<u64>,
        /// Default: 3n.
        #[arg(long)]
        k_max: Option<u64>,
        #[arg(long)]
        support_mass: Option<f64>,
    },
    /// Broadened density of states for k = 0..=k-max.
    Dos {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k_max: u64,
        #[arg(long)]
        omega_over_g: f64,
        #[arg(long, default_value_t = lambshift_core::dos::DEFAULT_BINS)]
        bins: usize,
        /// Gaussian width in units of ω0.
        #[arg(long, default_value_t = lambshift_core::dos::DEFAULT_SIGMA)]
        sigma: f64,
    },
    /// Row-sum and asymptotic bounds on the largest eigenvalue of L(j, k).
    Bounds {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        twice_j: u32,
        #[arg(long)]
        k: u64,
    },
    /// Whether g0·maxΛ stays small against ω0 on manifold k.
    RwaCheck {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        omega_over_g: f64,
        #[arg(long, default_value_t = lambshift_core::stats::DEFAULT_RWA_THRESHOLD)]
        threshold: f64,
    },
    /// Compare block spectra with dense diagonalization and closed forms.
    OracleCheck {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u64,
    },
}

fn emit(rendered: &Rendered, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => {
            let mut s = rendered.json.render();
            s.push('\n');
            s
        }
        Format::Csv => rendered.csv.clone(),
    };
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::Compute(format!("cannot write output: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.common.threads {
        if threads == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Compute(format!("thread pool: {e}")))?;
    }
    commands::validate(&cli.command)?;
    let rendered = commands::execute(&cli.command)?;
    emit(&rendered, cli.common.format, cli.common.out.as_ref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
