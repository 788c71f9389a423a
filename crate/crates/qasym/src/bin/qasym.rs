//! Thin command-line front end over the library: analyze one instance file,
//! run a seeded campaign, or check a truncated crossed-product configuration.
//!
//! Exit codes: 0 = all consistent, 1 = input error, 2 = numerical failure,
//! 3 = property violation. Violations are never downgraded to warnings.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qasym::error::{Error, Result};
use qasym::instance::{parse_instance, InstanceSpec};
use qasym::op::Tolerances;
use qasym::report::{campaign, run_analysis, Family, FORMAT_VERSION};
use qasym::svg::render_spectrum_svg;

fn version_string() -> &'static str {
    Box::leak(
        format!(
            "{} (report format {FORMAT_VERSION})",
            env!("CARGO_PKG_VERSION")
        )
        .into_boxed_str(),
    )
}

#[derive(Parser)]
#[command(name = "qasym", version = version_string(), about = "Asymptotics of quantum dynamics: spectra, attractors, decoherence-free algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Peripheral-classification tolerance.
    #[arg(long, value_name = "X")]
    tol_peripheral: Option<f64>,
    /// Residual tolerance for operator identities.
    #[arg(long, value_name = "X")]
    tol_residual: Option<f64>,
    /// Rank/nullspace cutoff.
    #[arg(long, value_name = "X")]
    tol_rank: Option<f64>,
    /// Positive-semidefinite slack.
    #[arg(long, value_name = "X")]
    tol_psd: Option<f64>,
}

impl TolArgs {
    fn tolerances(&self) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_peripheral {
            t.peripheral = v;
        }
        if let Some(v) = self.tol_residual {
            t.residual = v;
        }
        if let Some(v) = self.tol_rank {
            t.rank = v;
        }
        if let Some(v) = self.tol_psd {
            t.psd = v;
        }
        t.validate()?;
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a single instance file and print (or write) the report.
    Analyze {
        /// Instance file (UTF-8 JSON).
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "report.json")]
        out: Option<PathBuf>,
        /// Also render the spectrum figure.
        #[arg(long, value_name = "spectrum.svg")]
        svg: Option<PathBuf>,
        /// Override the instance seed (flag > QASYM_SEED > file).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Generate, analyze, and aggregate seeded random instances.
    Campaign {
        /// Instance family.
        #[arg(long, value_name = "unital|generic|gkls")]
        family: Family,
        /// Hilbert-space dimension.
        #[arg(long, value_name = "D")]
        dim: usize,
        /// Number of instances.
        #[arg(long, value_name = "N")]
        trials: usize,
        /// Master seed (flag > QASYM_SEED > default 0).
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
        /// Write the summary here instead of stdout.
        #[arg(long, value_name = "summary.json")]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Verify a truncated crossed-product configuration.
    Pukanszky {
        /// Word length (1..=4).
        #[arg(long, value_name = "N")]
        n: usize,
        /// Measure bias in (0, 1/2].
        #[arg(long, value_name = "L")]
        lambda: f64,
        /// Jump-weight family, e.g. geometric:0.5.
        #[arg(long, value_name = "FAMILY")]
        weights: Option<String>,
        /// Seed for the random algebra-element probes.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        tol: TolArgs,
    },
}

/// Seed precedence: command-line flag, then QASYM_SEED, then the fallback
/// (instance-file seed or default).
fn resolve_seed(flag: Option<u64>, fallback: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("QASYM_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::InvalidInput(format!("QASYM_SEED is not an integer: `{s}`"))),
        Err(_) => Ok(fallback),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze { file, out, svg, seed, tol } => {
            let tol = tol.tolerances()?;
            let mut spec: InstanceSpec = parse_instance(&file)?;
            spec.seed = resolve_seed(seed, spec.seed)?;
            let report = run_analysis(&spec, &tol)?;
            emit(&report.to_json()?, out.as_ref())?;
            if let Some(path) = &svg {
                render_spectrum_svg(&report, path)?;
            }
            Ok(report.consistent)
        }
        Command::Campaign { family, dim, trials, seed, out, tol } => {
            let tol = tol.tolerances()?;
            let seed = resolve_seed(seed, None)?.unwrap_or(0);
            let summary = campaign(family, dim, trials, seed, &tol)?;
            emit(&summary.to_json()?, out.as_ref())?;
            if !summary.consistent {
                return Err(Error::PropertyViolation(format!(
                    "campaign found inconsistent verdicts at seeds {:?}",
                    summary.inconsistent_seeds
                )));
            }
            Ok(true)
        }
        Command::Pukanszky { n, lambda, weights, seed, tol } => {
            let tol = tol.tolerances()?;
            let mut spec = InstanceSpec::pukanszky(n, lambda, weights);
            spec.seed = resolve_seed(seed, None)?;
            let report = run_analysis(&spec, &tol)?;
            emit(&report.to_json()?, None)?;
            Ok(report.consistent)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("error: report contains inconsistent verdicts");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
