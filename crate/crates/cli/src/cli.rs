//! Argument parsing, thread pool setup and error reporting.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use ppsim_core::RegimeKind;

use crate::manifest::ManifestError;
use crate::pipeline::{self, Job, Overrides};

pub const THREADS_ENV: &str = "PPSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ppsim", version, about = "Policy prioritization under corruption: simulation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Master seed, replacing the manifest's.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs per regime and country.
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_periods: Option<usize>,
    /// Convergence tolerance on `I >= T - tol`.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Comma-separated regime list, e.g. `lax-uninformed,strict-informed`.
    #[arg(long, value_delimiter = ',')]
    regimes: Option<Vec<RegimeKind>>,
}

impl RunFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            runs: self.runs,
            out: self.out.clone(),
            max_periods: self.max_periods,
            tolerance: self.tolerance,
            regimes: self.regimes.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a directed spillover network per country from a panel CSV.
    EstimateNetwork {
        panel: PathBuf,
        /// CSV `indicator,reversed`.
        #[arg(long)]
        polarity: Option<PathBuf>,
        /// Only this country.
        #[arg(long)]
        country: Option<String>,
        /// Keep correlation signs as edge weights.
        #[arg(long)]
        signed_weights: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Discover the adaptive government's expected allocation profile.
    Discover {
        manifest: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the regime ensembles and write every run.
    Simulate {
        manifest: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the regime ensembles and compare them against the benchmark.
    Evaluate {
        manifest: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Grid search for the implementation-effectiveness parameter.
    Calibrate {
        manifest: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Ward clustering of a country feature table.
    Cluster {
        features: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Cross-country summary tables of an evaluate output directory.
    Report { results: PathBuf },
    /// Write the synthetic fixture panel and manifests.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = crate::fixture::DEFAULT_SEED)]
        seed: u64,
    },
}

fn dispatch(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::EstimateNetwork {
            panel,
            polarity,
            country,
            signed_weights,
            out,
        } => pipeline::estimate_networks(&panel, polarity.as_deref(), country.as_deref(), signed_weights, &out),
        Command::Discover { manifest, flags } => pipeline::discover(&Job::load(&manifest, &flags.overrides())?),
        Command::Simulate { manifest, flags } => pipeline::simulate(&Job::load(&manifest, &flags.overrides())?),
        Command::Evaluate { manifest, flags } => {
            Ok(pipeline::evaluate(&Job::load(&manifest, &flags.overrides())?)?.files)
        }
        Command::Calibrate { manifest, flags } => {
            Ok(pipeline::calibrate(&Job::load(&manifest, &flags.overrides())?)?.1)
        }
        Command::Cluster { features, k, out } => Ok(vec![pipeline::cluster(&features, k, &out)?.1]),
        Command::Report { results } => Ok(pipeline::report(&results)?.1),
        Command::Fixture { out, seed } => crate::fixture::write(&out, seed),
    }
}

/// Thread count from `PPSIM_THREADS`, if set.
fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow!("{THREADS_ENV}: {e}")),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

fn run(command: Command) -> Result<Vec<PathBuf>> {
    match thread_limit()? {
        None => dispatch(command),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| dispatch(command)),
    }
}

/// Classifies an error for the machine-readable error line.
pub fn error_kind(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if cause.is::<ManifestError>() {
            return "manifest";
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
        if cause.is::<csv::Error>() || cause.is::<serde_json::Error>() {
            return "input";
        }
        if cause.is::<ppsim_core::Error>() {
            return "model";
        }
    }
    "error"
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", error_line("usage", msg.trim()));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(error_kind(&e), &format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
