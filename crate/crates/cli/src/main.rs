//! Batch front end: CDF curves, blocklength optimization and sweeps, each
//! run leaving a manifest that can be replayed.

mod cdf;
mod optimize;
mod output;
mod scenario;
mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use cdf::CdfParams;
use optimize::{Method, OptimizeParams, Sampling, SamplingArgs};
use output::{OutputDir, RunManifest, MANIFEST_NAME};
use scenario::{Scenario, ScenarioArgs};
use sweep::{SweepParams, Vary};

/// Malformed input detected after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "wiretap-fbl", version, about = "Outage, throughput and blocklength selection for short-packet wiretap links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "WIRETAP_FBL_OUT_DIR", default_value = "wiretap-fbl-out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Empirical, Gaussian-fit and optionally high-SNR CDFs of the secrecy rate.
    Cdf {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Average SNR in dB; repeat for several curves.
        #[arg(long = "gamma-db", allow_negative_numbers = true)]
        gamma_db: Vec<f64>,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(1..))]
        blocklength: u32,
        #[arg(long)]
        seed: u64,
        /// Add the high-SNR closed-form CDF column.
        #[arg(long)]
        high_snr: bool,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Throughput-optimal blocklength for one scenario.
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long = "gamma-db", allow_negative_numbers = true)]
        gamma_db: Option<f64>,
        #[arg(long, value_enum, default_value_t = Method::General)]
        method: Method,
        /// Required with --method monte-carlo.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Optimal blocklength over a range of one parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long = "gamma-db", allow_negative_numbers = true)]
        gamma_db: Option<f64>,
        #[arg(long, value_enum)]
        vary: Vary,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        #[arg(long, value_enum, default_value_t = Method::General)]
        method: Method,
        /// Required with --method monte-carlo.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run a recorded invocation and compare output digests.
    Replay {
        manifest: PathBuf,
        /// Output directory [default: `replay` next to the manifest].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn monte_carlo_sampling(method: Method, seed: Option<u64>, args: &SamplingArgs) -> Option<Sampling> {
    if method != Method::MonteCarlo {
        return None;
    }
    let Some(seed) = seed else {
        Cli::command()
            .error(ErrorKind::MissingRequiredArgument, "--seed is required with --method monte-carlo")
            .exit()
    };
    Some(Sampling::resolve(args, seed))
}

/// A fully resolved invocation.
enum Job {
    Cdf(CdfParams),
    Optimize(OptimizeParams),
    Sweep(SweepParams),
}

impl Job {
    fn name(&self) -> &'static str {
        match self {
            Job::Cdf(_) => "cdf",
            Job::Optimize(_) => "optimize",
            Job::Sweep(_) => "sweep",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Job::Cdf(p) => Some(p.sampling.seed),
            Job::Optimize(p) => p.sampling.map(|s| s.seed),
            Job::Sweep(p) => p.sampling.map(|s| s.seed),
        }
    }

    fn params(&self) -> Result<serde_json::Value> {
        fn to<T: Serialize>(t: &T) -> Result<serde_json::Value> {
            Ok(serde_json::to_value(t)?)
        }
        match self {
            Job::Cdf(p) => to(p),
            Job::Optimize(p) => to(p),
            Job::Sweep(p) => to(p),
        }
    }

    fn from_manifest(m: &RunManifest) -> Result<Self> {
        let params = m.params.clone();
        Ok(match m.command.as_str() {
            "cdf" => Job::Cdf(serde_json::from_value(params)?),
            "optimize" => Job::Optimize(serde_json::from_value(params)?),
            "sweep" => Job::Sweep(serde_json::from_value(params)?),
            other => bail!(UsageError(format!("manifest names unknown command {other:?}"))),
        })
    }

    /// Writes the outputs and the manifest; returns the manifest.
    fn run(&self, dir: &Path, echo: bool) -> Result<RunManifest> {
        let start = Instant::now();
        let mut out = OutputDir::create(dir)?;
        match self {
            Job::Cdf(p) => cdf::execute(p, &mut out)?,
            Job::Optimize(p) => {
                let text = optimize::execute(p, &mut out)?;
                if echo {
                    print!("{text}");
                }
            }
            Job::Sweep(p) => sweep::execute(p, &mut out)?,
        }
        let manifest = RunManifest {
            command: self.name().to_string(),
            params: self.params()?,
            seed: self.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: start.elapsed().as_secs_f64(),
            outputs: out.files().to_vec(),
        };
        let path = manifest.write(&out)?;
        eprintln!("wrote {} output file(s) and {}", manifest.outputs.len(), path.display());
        Ok(manifest)
    }
}

fn replay(manifest_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let recorded = RunManifest::read(manifest_path)?;
    let dir = out.unwrap_or_else(|| {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("replay")
    });
    if dir.join(MANIFEST_NAME) == manifest_path {
        bail!(UsageError("replay output directory must differ from the recorded one".into()));
    }
    let fresh = Job::from_manifest(&recorded)?.run(&dir, false)?;
    let mut mismatched = 0;
    for file in &recorded.outputs {
        let status = match fresh.outputs.iter().find(|f| f.path == file.path) {
            Some(f) if f.sha256 == file.sha256 => "identical",
            Some(_) => "DIFFERS",
            None => "MISSING",
        };
        if status != "identical" {
            mismatched += 1;
        }
        println!("{}: {status}", file.path);
    }
    if mismatched > 0 {
        bail!("{mismatched} of {} output(s) not reproduced", recorded.outputs.len());
    }
    println!("replay: all {} output(s) reproduced", recorded.outputs.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (job, dir) = match cli.command {
        Command::Cdf {
            scenario,
            gamma_db,
            blocklength,
            seed,
            high_snr,
            sampling,
            out,
        } => {
            let first = gamma_db.first().copied();
            let scenario = Scenario::resolve(&scenario, first)?;
            let gamma_db = if gamma_db.is_empty() { vec![scenario.gamma_db] } else { gamma_db };
            let params = CdfParams {
                gamma_db,
                blocklength,
                high_snr,
                scenario,
                sampling: Sampling::resolve(&sampling, seed),
            };
            (Job::Cdf(params), out.out)
        }
        Command::Optimize {
            scenario,
            gamma_db,
            method,
            seed,
            sampling,
            out,
        } => {
            let params = OptimizeParams {
                method,
                scenario: Scenario::resolve(&scenario, gamma_db)?,
                sampling: monte_carlo_sampling(method, seed, &sampling),
            };
            (Job::Optimize(params), out.out)
        }
        Command::Sweep {
            scenario,
            gamma_db,
            vary,
            from,
            to,
            steps,
            method,
            seed,
            sampling,
            out,
        } => {
            let params = SweepParams {
                vary,
                from,
                to,
                steps,
                method,
                scenario: Scenario::resolve(&scenario, gamma_db)?,
                sampling: monte_carlo_sampling(method, seed, &sampling),
            };
            (Job::Sweep(params), out.out)
        }
        Command::Replay { manifest, out } => return replay(&manifest, out),
    };
    job.run(&dir, true).map(|_| ())
}

/// Malformed input exits with 2 like clap's own usage errors; anything
/// else that goes wrong exits with 1.
fn exit_status(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<wiretap_fbl::Error>() {
        Some(wiretap_fbl::Error::InvalidConfig(_) | wiretap_fbl::Error::Domain(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_status(&err))
        }
    }
}
