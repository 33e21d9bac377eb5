//! `willmore-lab`: analyses of isolated singularities of Willmore surfaces
//! from the command line.
//!
//! Exit codes: 0 success, 1 failed identity checks (`verify`), 2 bad surface
//! or configuration, 3 numerical failure. Errors are printed to stderr as a
//! JSON object `{"error": {"kind", "message", "exit_code"}}`.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Command;
use config::{AnnulusArg, ConfigLayer, RunConfig, SurfaceArg};
use error::CliError;

#[derive(Parser)]
#[command(name = "willmore-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Branch order, expansion coefficients, residue and verdict (JSON).
    Report,
    /// Residue of the Willmore current on three circles and their spread (JSON).
    Residue,
    /// Pointwise identity sweep; exits 1 if any check fails (JSON, or CSV for a .csv --out).
    Verify,
    /// Willmore and Gauss-map energies over the annulus with a refinement table (JSON).
    Energy,
    /// Per-point geometry on a polar grid (CSV).
    Dump,
    /// δ(r) = r sup |∇n| on geometric radii (CSV).
    Delta,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Report => Command::Report,
            Cmd::Residue => Command::Residue,
            Cmd::Verify => Command::Verify,
            Cmd::Energy => Command::Energy,
            Cmd::Dump => Command::Dump,
            Cmd::Delta => Command::Delta,
        }
    }
}

#[derive(Args)]
struct Flags {
    /// Surface as inline JSON or `@path`.
    #[arg(long, global = true)]
    surface: Option<String>,
    /// Annulus `r_in,r_out` in the chart.
    #[arg(long, global = true, allow_hyphen_values = true)]
    annulus: Option<String>,
    /// Radial count (quadrature nodes, grid rings or δ radii).
    #[arg(long, global = true)]
    nr: Option<usize>,
    /// Angular count (circle samples; at least 64 for residues).
    #[arg(long, global = true)]
    nphi: Option<usize>,
    /// Finite-difference step factor in (0, 0.1].
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Relative tolerance of the classifier.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of sample points for `verify`.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// JSON file with any of the keys above; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            surface: self.surface.clone().map(SurfaceArg::Text),
            annulus: self.annulus.clone().map(AnnulusArg::Text),
            nr: self.nr,
            nphi: self.nphi,
            kappa: self.kappa,
            tol: self.tol,
            out: self.out.clone(),
            seed: self.seed,
            points: self.points,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let base = match &cli.flags.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    let cfg = RunConfig::resolve(base.merged(cli.flags.layer()))?;
    let output = commands::run(cli.command.into(), &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &output.text)?,
        None => std::io::stdout().write_all(output.text.as_bytes())?,
    }
    match output.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
