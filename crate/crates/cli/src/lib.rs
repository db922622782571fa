//! Command-line front end for the `qsot` library.
//!
//! Every command produces an [`Output`]: a versioned JSON document, a plain
//! text rendering of it, and whether the command's checks passed.

pub mod commands;
pub mod document;
pub mod error;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use document::Envelope;
pub use error::{CliError, CliResult};
use verify::Suite;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Parser)]
#[command(
    name = "qsot",
    version,
    about = "Two-time expectation values and states over time"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice (decimal or 0x-prefixed hex).
    #[arg(long, global = true, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
    /// Worker threads; 0 uses the hardware default.
    #[arg(long, global = true, env = "QSOT_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Replaces the default upper-bound tolerances of verification claims.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    V,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical state over time of a process document.
    Sot { process: PathBuf },
    /// Qutrit SIC-POVM, its light-touch basis and an overlap check.
    Sic {
        #[arg(long, value_enum, default_value_t = Family::W)]
        family: Family,
        /// W-family phase, e.g. 0.3 or pi/7.
        #[arg(long, default_value = "0", value_parser = parse_angle)]
        chi: f64,
        #[arg(long, default_value = "0.816496580927726", value_parser = parse_angle)]
        r0: f64,
        #[arg(long, default_value = "pi/3", value_parser = parse_angle)]
        theta: f64,
        #[arg(long, default_value = "pi/3", value_parser = parse_angle)]
        phi: f64,
        /// Images of 0, 1, 2 under the permutation.
        #[arg(long, default_value = "0,1,2", value_parser = parse_perm)]
        perm: [usize; 3],
    },
    /// Seeded numerical checks of the library's claims.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Inclusive range such as 2..3, or a single dimension.
        #[arg(long, default_value = "2..3", value_parser = parse_dims)]
        dims: DimRange,
        #[arg(long, default_value_t = 25)]
        trials: usize,
    },
    /// Simulate the sequential measurement protocol.
    Sample {
        process: PathBuf,
        obs_a: PathBuf,
        obs_b: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
    },
    /// Rebuild the state over time from expectation values.
    PdmReconstruct {
        process: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Shots per basis pair for the sampled method.
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
    },
}

/// Dimensions lo..=hi as given on the command line; checked when run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

/// A real number, or a multiple of pi written as `pi`, `pi/3`, `5pi/3`,
/// `2*pi/7` or `-pi/2`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || format!("invalid angle {s:?}");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coeff = num
        .trim()
        .strip_suffix("pi")
        .ok_or_else(bad)?
        .trim_end_matches('*')
        .trim();
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coeff * std::f64::consts::PI / den)
}

fn parse_perm(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("invalid permutation {s:?}: {e}"))?;
    <[usize; 3]>::try_from(parts).map_err(|_| format!("permutation {s:?} needs three entries"))
}

fn parse_dims(s: &str) -> Result<DimRange, String> {
    let bad = |e: std::num::ParseIntError| format!("invalid dimension range {s:?}: {e}");
    match s.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            Ok(DimRange {
                lo: lo.trim().parse().map_err(bad)?,
                hi: hi.trim().parse().map_err(bad)?,
            })
        }
        None => {
            let d = s.trim().parse().map_err(bad)?;
            Ok(DimRange { lo: d, hi: d })
        }
    }
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Output {
    pub document: Envelope,
    pub pretty: String,
    /// False when a verification claim failed (exit code 1).
    pub pass: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.document.to_json() + "\n",
            Format::Pretty => self.pretty.clone(),
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    let g = &cli.global;
    if let Some(tol) = g.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::Validation(format!(
                "--tol must be a finite nonnegative number, got {tol}"
            )));
        }
    }
    match &cli.command {
        Command::Sot { process } => commands::sot(process),
        Command::Sic {
            family,
            chi,
            r0,
            theta,
            phi,
            perm,
        } => commands::sic(*family, *chi, *r0, *theta, *phi, *perm),
        Command::Verify {
            suite,
            dims,
            trials,
        } => commands::verify(*suite, *dims, *trials, g.seed, g.tol),
        Command::Sample {
            process,
            obs_a,
            obs_b,
            shots,
        } => commands::sample(process, obs_a, obs_b, *shots, g.seed),
        Command::PdmReconstruct {
            process,
            method,
            shots,
        } => commands::pdm_reconstruct(process, *method, *shots, g.seed),
    }
}
