mod commands;
mod envelope;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{CliError, LhvSource, SampleArgs};
use hardylab_core::observables::{Interpretation, Observable};
use hardylab_core::protocol::{BellIndex, BellPair};
use hardylab_core::Tolerance;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hardylab",
    version,
    about = "Exact and sampled checks of a teleportation-based Hardy construction"
)]
struct Cli {
    /// Output format; JSON is the stable contract
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Numerical tolerance for every comparison
    #[arg(long, global = true, default_value_t = hardylab_core::DEFAULT_TOLERANCE, value_parser = parse_tolerance)]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Re-derive a printed Bell-basis expansion of the total state
    Expand {
        /// Measured pair: A1 or 2B
        #[arg(long, value_parser = parse_pair)]
        slots: BellPair,
    },
    /// Measure the four Hardy quantities for one Bell pair or all 16
    Audit {
        #[arg(long, value_parser = parse_bell, default_value = "psi-", conflicts_with = "all")]
        d1: BellIndex,
        #[arg(long, value_parser = parse_bell, default_value = "psi-", conflicts_with = "all")]
        d2: BellIndex,
        #[arg(long, value_parser = parse_interp, default_value = "fixed")]
        interp: Interpretation,
        /// Audit every (d1, d2) combination
        #[arg(long)]
        all: bool,
    },
    /// Decide whether a probability table admits a local hidden-variable model
    Lhv {
        /// paper-claims | quantum:<d1>,<d2>,<interp> | file:<path>
        #[arg(long, value_parser = LhvSource::parse)]
        source: LhvSource,
    },
    /// Sample one measurement context with a fixed seed
    Sample {
        /// Two observables, Alice's first: d1d2, d1u2, u1d2, u1u2, ...
        #[arg(long, value_parser = commands::parse_context, default_value = "d1d2")]
        context: (Observable, Observable),
        #[arg(long, value_parser = parse_bell, default_value = "psi-")]
        d1: BellIndex,
        #[arg(long, value_parser = parse_bell, default_value = "psi-")]
        d2: BellIndex,
        #[arg(long, value_parser = parse_interp, default_value = "fixed")]
        interp: Interpretation,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
    },
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err("tolerance must be a positive finite number".into())
    }
}

fn parse_pair(s: &str) -> Result<BellPair, String> {
    BellPair::parse(s).ok_or_else(|| format!("unknown slot pair `{s}` (A1 or 2B)"))
}

fn parse_bell(s: &str) -> Result<BellIndex, String> {
    BellIndex::parse(s).ok_or_else(|| format!("unknown Bell label `{s}` (psi-, psi+, phi-, phi+)"))
}

fn parse_interp(s: &str) -> Result<Interpretation, String> {
    Interpretation::parse(s).ok_or_else(|| format!("unknown interpretation `{s}` (fixed or collapsed)"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerance(cli.tolerance);
    let result = match &cli.command {
        Command::Expand { slots } => commands::expand(*slots, tol),
        Command::Audit { d1, d2, interp, all } => commands::audit((!all).then_some((*d1, *d2)), *interp, tol),
        Command::Lhv { source } => commands::lhv(source, tol),
        Command::Sample {
            context,
            d1,
            d2,
            interp,
            shots,
            seed,
        } => commands::sample(
            &SampleArgs {
                context: *context,
                d1: *d1,
                d2: *d2,
                interp: *interp,
                shots: *shots,
                seed: *seed,
            },
            tol,
        ),
    };
    match result {
        Ok(out) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.envelope).expect("envelope serializes") + "\n",
                Format::Table => out.text,
            };
            // a closed pipe (e.g. `| head`) is not an error worth a panic
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("hardylab: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Failed(_) => 1,
            })
        }
    }
}
