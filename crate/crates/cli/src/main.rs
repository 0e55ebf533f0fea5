//! `kgbound`: spectra, wavefunctions, numerical solves and boosts from the
//! command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics-domain error,
//! 4 numerical failure.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kgbound::{ErrorClass, KgError};

use config::{Command, Format, Mode, PotentialName, ScalarName, Units};

#[derive(Debug, Parser)]
#[command(name = "kgbound", version, about = "Klein-Gordon bound states: spectra, wavefunctions and solves")]
struct Cli {
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

/// Overrides; each takes precedence over the config file.
#[derive(Debug, Default, clap::Args)]
pub struct Flags {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nuclear charge number.
    #[arg(long)]
    z: Option<f64>,
    /// Fine-structure constant.
    #[arg(long)]
    alpha: Option<f64>,
    /// Principal quantum number.
    #[arg(long)]
    n: Option<u32>,
    /// Angular momentum.
    #[arg(long)]
    l: Option<u32>,
    /// Largest n when no single state is selected.
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    potential: Option<PotentialName>,
    /// Scalar channel in kg-scalar-vector mode.
    #[arg(long, value_enum)]
    scalar: Option<ScalarName>,
    /// Hulthen screening in units of the inverse Bohr radius.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    units: Option<Units>,
    /// Grid points (solver grid or tabulation grid).
    #[arg(long)]
    grid_n: Option<usize>,
    /// Outer radius of the grid.
    #[arg(long)]
    rmax: Option<f64>,
    /// Self-consistency tolerance on |dm| / m0.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid sizes of a convergence study, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Boost velocity v / c.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn exit_code(e: &KgError) -> u8 {
    match e.class() {
        ErrorClass::Input => EXIT_CONFIG,
        ErrorClass::Domain => EXIT_DOMAIN,
        ErrorClass::Numerical => EXIT_NUMERICAL,
    }
}

fn thread_count() -> Result<usize, String> {
    match std::env::var("KGBOUND_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("KGBOUND_THREADS must be a non-negative integer, got {v:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prepared = (|| {
        let file = match &cli.flags.config {
            Some(path) => config::load(path)?,
            None => config::ConfigFile::default(),
        };
        let settings = config::resolve(cli.command, file, &cli.flags)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count()?)
            .build()
            .map_err(|e| e.to_string())?;
        Ok::<_, String>((settings, pool))
    })();
    let (settings, pool) = match prepared {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("kgbound: configuration error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let report = match pool.install(|| commands::run(&settings)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kgbound: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = match settings.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => report.table.to_json(),
    };
    match &settings.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("kgbound: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        }
        None => print!("{text}"),
    }
    match report.row_error {
        Some(e) => {
            eprintln!("kgbound: some rows failed; first failure: {e}");
            ExitCode::from(exit_code(&e))
        }
        None => ExitCode::SUCCESS,
    }
}
