//! Command-line front end for `twistlab-core`.
//!
//! Exit codes: 0 success, 1 numeric or invariant failure, 2 usage or
//! schema error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use config::{resolve, EvolveArgs, FeasibilityArgs, QpdArgs, SweepMuArgs, SweepSArgs, VerifyOracleArgs};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "twistlab", version, about = "Spin squeezing by double-pass Faraday twisting")]
pub struct Cli {
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 or absent: one per core).
    #[arg(long, global = true, env = "TWISTLAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the x-polarized coherent state and report squeezing.
    Evolve(EvolveArgs),
    /// Sample the quasiprobability distribution on a sphere grid.
    Qpd(QpdArgs),
    /// Squeezing diagnostics over a range of mu.
    SweepMu(SweepMuArgs),
    /// mu_half, mu_min and zeta_min over a range of S, with power-law fits.
    SweepS(SweepSArgs),
    /// Map a laboratory setup to (mu, J) and check the assumptions.
    Feasibility(FeasibilityArgs),
    /// Cross-check the reduced map against brute-force atom-light models.
    VerifyOracle(VerifyOracleArgs),
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {:?} threads: {e}", cli.threads)))?;
    let file = cli.config.as_deref();
    pool.install(|| match &cli.command {
        Command::Evolve(a) => commands::evolve(&resolve(a, file)?),
        Command::Qpd(a) => commands::qpd_cmd(&resolve(a, file)?),
        Command::SweepMu(a) => commands::sweep_mu(&resolve(a, file)?),
        Command::SweepS(a) => commands::sweep_s(&resolve(a, file)?),
        Command::Feasibility(a) => commands::feasibility(&resolve(a, file)?),
        Command::VerifyOracle(a) => commands::verify_oracle(&resolve(a, file)?),
    })
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
