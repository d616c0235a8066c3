//! Blocklength optimization by any of the three methods, and its JSON report.

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize, Serializer};
use wiretap_fbl::feasible::Interval;
use wiretap_fbl::highsnr::{constrained_optimum, HighSnrParams};
use wiretap_fbl::moments::{MomentCache, MuCoefficients, DEFAULT_TOL};
use wiretap_fbl::montecarlo::{brute_force_optimum, SamplingMode, SimulationSpec};
use wiretap_fbl::optimizer::{optimize_with_moments, OptimizationResult};

use crate::output::{fmt_f64, json_f64, OutputDir};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    General,
    HighSnr,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    GainSpace,
    VectorSpace,
}

impl From<Mode> for SamplingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::GainSpace => SamplingMode::GainSpace,
            Mode::VectorSpace => SamplingMode::VectorSpace,
        }
    }
}

/// Sampling flags for the Monte Carlo paths.
#[derive(Args, Debug, Clone)]
pub struct SamplingArgs {
    /// Fading realizations to draw.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub streams: Option<usize>,
    /// How channel gains are generated.
    #[arg(long, value_enum, default_value_t = Mode::GainSpace)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
    pub streams: usize,
    pub mode: SamplingMode,
}

impl Sampling {
    pub fn resolve(args: &SamplingArgs, seed: u64) -> Self {
        let streams = args
            .streams
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1);
        Sampling {
            samples: args.samples as usize,
            seed,
            streams,
            mode: args.mode.into(),
        }
    }

    pub fn spec(&self, cfg: wiretap_fbl::SystemConfig) -> SimulationSpec {
        SimulationSpec {
            cfg,
            samples: self.samples,
            seed: self.seed,
            streams: self.streams,
            mode: self.mode,
        }
    }
}

/// Resolved parameters of `optimize`, as echoed in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeParams {
    pub method: Method,
    pub scenario: Scenario,
    pub sampling: Option<Sampling>,
}

fn opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    x.map_or(serde_json::Value::Null, json_f64).serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalReport {
    #[serde(serialize_with = "ser_f64")]
    pub lower: f64,
    #[serde(serialize_with = "ser_f64")]
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    json_f64(*x).serialize(s)
}

impl From<&Interval> for IntervalReport {
    fn from(i: &Interval) -> Self {
        IntervalReport {
            lower: i.lower,
            upper: i.upper,
            lower_open: i.lower_open,
            upper_open: i.upper_open,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MuReport {
    #[serde(serialize_with = "ser_f64")]
    pub mu0: f64,
    #[serde(serialize_with = "ser_f64")]
    pub mu1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub mu2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub mu3: f64,
    #[serde(serialize_with = "ser_f64")]
    pub mu4: f64,
}

impl From<&MuCoefficients> for MuReport {
    fn from(m: &MuCoefficients) -> Self {
        MuReport {
            mu0: m.mu0,
            mu1: m.mu1,
            mu2: m.mu2,
            mu3: m.mu3,
            mu4: m.mu4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub reason: Option<String>,
    pub evaluations: usize,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_f64")]
    pub lower_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<MuReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
}

/// One optimization result. Field order is the JSON key order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub method: Method,
    #[serde(rename = "N_opt")]
    pub n_opt: Option<u32>,
    #[serde(rename = "T_opt", serialize_with = "opt_f64")]
    pub t_opt: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    pub p_out_at_opt: Option<f64>,
    pub feasible_intervals: Vec<IntervalReport>,
    pub diagnostics: Diagnostics,
}

impl Report {
    fn new(method: Method, r: OptimizationResult) -> Self {
        let found = r.n_opt.is_some();
        Report {
            method,
            n_opt: r.n_opt,
            t_opt: found.then_some(r.throughput_opt),
            p_out_at_opt: r.outage_at_opt.filter(|_| found).map(|p| p.value()),
            feasible_intervals: r.feasible.intervals.iter().map(IntervalReport::from).collect(),
            diagnostics: Diagnostics {
                reason: r.reason,
                evaluations: r.evaluations,
                notes: r.diagnostics,
                lower_limit: r.feasible.lower_limit,
                mu: None,
                sampling: None,
            },
        }
    }

    /// CSV fields `N_opt, T_opt, p_out_at_opt`; empty when absent.
    pub fn csv_fields(&self) -> [String; 3] {
        [
            self.n_opt.map_or(String::new(), |n| n.to_string()),
            self.t_opt.map_or(String::new(), fmt_f64),
            self.p_out_at_opt.map_or(String::new(), fmt_f64),
        ]
    }
}

pub fn solve(
    scenario: &Scenario,
    method: Method,
    sampling: Option<&Sampling>,
    cache: &MomentCache,
) -> Result<Report> {
    let cfg = scenario.to_config()?;
    let report = match method {
        Method::General => {
            let mu = cache.get(&cfg, DEFAULT_TOL)?.mu(cfg.eps_bar, cfg.delta_bar)?;
            let mut report = Report::new(method, optimize_with_moments(&cfg, &mu)?);
            report.diagnostics.mu = Some(MuReport::from(&mu));
            report
        }
        Method::HighSnr => Report::new(method, constrained_optimum(&HighSnrParams::from_config(&cfg)?)?),
        Method::MonteCarlo => {
            let sampling = sampling.expect("monte-carlo runs carry sampling parameters");
            let mut report = Report::new(method, brute_force_optimum(&sampling.spec(cfg))?);
            report.diagnostics.sampling = Some(*sampling);
            report
        }
    };
    Ok(report)
}

pub const REPORT_NAME: &str = "optimize.json";

pub fn execute(p: &OptimizeParams, out: &mut OutputDir) -> Result<String> {
    let report = solve(&p.scenario, p.method, p.sampling.as_ref(), &MomentCache::new())?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    out.write(REPORT_NAME, text.as_bytes())?;
    Ok(text)
}
