//! Monte Carlo ground truth: fading realizations, empirical rate CDFs,
//! empirical outage and the simulation-based optimal blocklength.
//!
//! Samples are produced in fixed blocks of [`BLOCK_LEN`]. Block `i` is drawn
//! from ChaCha8 stream `i` under the run seed, so the output depends only on
//! `(seed, samples, mode)`; `streams` sets the worker count and nothing else.
//!
//! Normal variates use the Marsaglia polar method, exponentials come from
//! `rand_distr::Exp1`.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::ThroughputPoint;
use crate::error::{Error, Result};
use crate::feasible::{EmptyReason, FeasibleSet, Interval};
use crate::model::{dispersion, secrecy_capacity, ChannelGains, SystemConfig};
use crate::optimizer::{best_point, OptimizationResult};
use crate::specfun::Probability;

/// Samples per RNG stream.
pub const BLOCK_LEN: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// `γ_b` as `γ̄` times a sum of `K` unit exponentials, `γ_e` as `γ̄` times one.
    GainSpace,
    /// Complex Gaussian channel vectors with maximal-ratio transmission.
    VectorSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub cfg: SystemConfig,
    pub samples: usize,
    pub seed: u64,
    pub streams: usize,
    pub mode: SamplingMode,
}

impl SimulationSpec {
    pub fn new(cfg: SystemConfig, samples: usize, seed: u64) -> Self {
        SimulationSpec {
            cfg,
            samples,
            seed,
            streams: 1,
            mode: SamplingMode::GainSpace,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.samples < 1 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.streams < 1 {
            return Err(Error::InvalidConfig("streams must be at least 1".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.streams)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {} workers: {e}", self.streams)))
    }
}

/// Pair of standard normals by the polar method.
fn polar_normals<R: Rng>(rng: &mut R) -> (f64, f64) {
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// `CN(0, 1)` entry: unit variance split evenly over real and imaginary parts.
fn complex_normal<R: Rng>(rng: &mut R) -> (f64, f64) {
    let (x, y) = polar_normals(rng);
    (x * std::f64::consts::FRAC_1_SQRT_2, y * std::f64::consts::FRAC_1_SQRT_2)
}

fn draw<R: Rng>(rng: &mut R, cfg: &SystemConfig, mode: SamplingMode, hb: &mut [(f64, f64)]) -> ChannelGains {
    let snr = cfg.mean_snr;
    match mode {
        SamplingMode::GainSpace => {
            let sum: f64 = (0..cfg.antennas).map(|_| rng.sample::<f64, _>(Exp1)).sum();
            let e: f64 = rng.sample(Exp1);
            ChannelGains::new(snr * sum, snr * e)
        }
        SamplingMode::VectorSpace => {
            for h in hb.iter_mut() {
                *h = complex_normal(rng);
            }
            let norm2: f64 = hb.iter().map(|(re, im)| re * re + im * im).sum();
            // h_eᵀ h_b* accumulated entry by entry.
            let (mut pr, mut pi) = (0.0, 0.0);
            for &(br, bi) in hb.iter() {
                let (er, ei) = complex_normal(rng);
                pr += er * br + ei * bi;
                pi += ei * br - er * bi;
            }
            ChannelGains::new(snr * norm2, snr * (pr * pr + pi * pi) / norm2)
        }
    }
}

fn block(spec: &SimulationSpec, index: usize, len: usize) -> Vec<ChannelGains> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let mut hb = vec![(0.0, 0.0); spec.cfg.antennas as usize];
    (0..len).map(|_| draw(&mut rng, &spec.cfg, spec.mode, &mut hb)).collect()
}

/// The first `count` realizations of the run.
pub fn sample_gains(spec: &SimulationSpec, count: usize) -> Result<Vec<ChannelGains>> {
    spec.validate()?;
    let blocks = count.div_ceil(BLOCK_LEN);
    let parts: Vec<Vec<ChannelGains>> = spec.pool()?.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|i| block(spec, i, BLOCK_LEN.min(count - i * BLOCK_LEN)))
            .collect()
    });
    Ok(parts.concat())
}

/// Sorted samples with the usual right-continuous step CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `≤ r`.
    pub fn query(&self, r: f64) -> Probability {
        if self.sorted.is_empty() {
            return Probability::ZERO;
        }
        let count = self.sorted.partition_point(|&x| x <= r);
        Probability::clamped(count as f64 / self.sorted.len() as f64)
    }

    /// Smallest sample with at least a fraction `p` of samples at or below it.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    /// Kolmogorov distance `sup_r |F_n(r) − F(r)|` to a continuous CDF `f`.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in self.sorted.iter().enumerate() {
            let fx = f(x);
            d = d.max((i + 1) as f64 / n - fx).max(fx - i as f64 / n);
        }
        d
    }
}

/// Result of a two-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub critical: f64,
    pub reject: bool,
}

/// Two-sample KS test at level 0.01 with the asymptotic critical value.
pub fn two_sample_ks(a: &EmpiricalCdf, b: &EmpiricalCdf) -> KsTest {
    // c(0.01) = √(−ln(0.005)/2)
    const C_ALPHA: f64 = 1.627_624_052_418_201_5;
    let (x, y) = (a.values(), b.values());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let critical = C_ALPHA * ((n + m) / (n * m)).sqrt();
    KsTest {
        statistic: d,
        critical,
        reject: d > critical,
    }
}

/// Per-realization ingredients of `R̄_s(N) = C_s − w/√N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSamples {
    capacity: Vec<f64>,
    backoff: Vec<f64>,
}

impl RateSamples {
    pub fn from_gains(gains: &[ChannelGains], q_eps: f64, q_delta: f64) -> Self {
        let (capacity, backoff) = gains
            .iter()
            .map(|&g| {
                let w = (dispersion(g.gamma_b).sqrt() * q_eps + dispersion(g.gamma_e).sqrt() * q_delta) / LN_2;
                (secrecy_capacity(g), w)
            })
            .unzip();
        RateSamples { capacity, backoff }
    }

    pub fn draw(spec: &SimulationSpec) -> Result<Self> {
        let gains = sample_gains(spec, spec.samples)?;
        let (qe, qd) = spec.cfg.backoff_quantiles()?;
        Ok(Self::from_gains(&gains, qe, qd))
    }

    pub fn len(&self) -> usize {
        self.capacity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacity.is_empty()
    }

    pub fn rates(&self, n: f64) -> Vec<f64> {
        let root = n.sqrt();
        self.capacity
            .iter()
            .zip(&self.backoff)
            .map(|(c, w)| c - w / root)
            .collect()
    }

    pub fn rate_cdf(&self, n: f64) -> EmpiricalCdf {
        EmpiricalCdf::new(self.rates(n))
    }

    /// Fraction of realizations with `R̄_s(N) ≤ r0`.
    pub fn outage_at_rate(&self, n: f64, r0: f64) -> Probability {
        let root = n.sqrt();
        let hits = self
            .capacity
            .iter()
            .zip(&self.backoff)
            .filter(|(c, w)| *c - *w / root <= r0)
            .count();
        Probability::clamped(hits as f64 / self.len() as f64)
    }

    /// Fraction of realizations with `R̄_s(N) ≤ B/N`.
    pub fn outage(&self, n: u32, bits: u32) -> Probability {
        self.outage_at_rate(n as f64, bits as f64 / n as f64)
    }

    /// Scans every `N ∈ [1, N_G]` on these realizations.
    pub fn brute_force_optimum(&self, cfg: &SystemConfig) -> OptimizationResult {
        let zeta = cfg.zeta.map_or(1.0, |z| z.value());
        let points: Vec<ThroughputPoint> = (1..=cfg.max_blocklength)
            .into_par_iter()
            .map(|n| ThroughputPoint::new(n, cfg.payload_bits as f64 / n as f64, self.outage(n, cfg.payload_bits)))
            .collect();
        let evaluations = points.len();
        let feasible: Vec<&ThroughputPoint> = points.iter().filter(|p| p.outage.value() <= zeta).collect();
        // Outage is nonincreasing in N on shared realizations, so the feasible
        // integers form one run ending at N_G.
        let set = match feasible.first() {
            Some(first) => FeasibleSet::from_intervals(
                vec![Interval::closed(first.blocklength as f64, cfg.max_blocklength as f64)],
                None,
            ),
            None => FeasibleSet::empty(EmptyReason::ConstraintUnsatisfiable),
        };
        match best_point(feasible.into_iter().copied()) {
            Some(best) => OptimizationResult::found(best, set, evaluations),
            None => OptimizationResult::absent(set, evaluations, EmptyReason::ConstraintUnsatisfiable.to_string()),
        }
    }
}

/// Empirical CDF of `R̄_s` at blocklength `n`.
pub fn empirical_rate_cdf(spec: &SimulationSpec, n: f64) -> Result<EmpiricalCdf> {
    check_blocklength(n)?;
    Ok(RateSamples::draw(spec)?.rate_cdf(n))
}

/// Empirical `Pr(R̄_s ≤ B/N)`.
pub fn empirical_outage(spec: &SimulationSpec, n: u32) -> Result<Probability> {
    check_blocklength(n as f64)?;
    Ok(RateSamples::draw(spec)?.outage(n, spec.cfg.payload_bits))
}

/// Simulation-based optimal blocklength with common random numbers over `N`.
pub fn brute_force_optimum(spec: &SimulationSpec) -> Result<OptimizationResult> {
    let samples = RateSamples::draw(spec)?;
    Ok(spec.pool()?.install(|| samples.brute_force_optimum(&spec.cfg)))
}

fn check_blocklength(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("blocklength must be at least 1, got {n}")))
    }
}
