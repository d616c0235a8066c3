//! Outage probability and effective throughput under the Gaussian fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::moments::{fit_at_blocklength, GaussianFit, MuCoefficients};
use crate::specfun::{std_normal_cdf, Probability};

/// Throughput evaluation at one blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputPoint {
    pub blocklength: u32,
    /// Coding rate `R₀ = B/N`.
    pub rate: f64,
    pub outage: Probability,
    /// `R₀·(1 − p_out)`.
    pub throughput: f64,
}

impl ThroughputPoint {
    pub fn new(blocklength: u32, rate: f64, outage: Probability) -> Self {
        ThroughputPoint {
            blocklength,
            rate,
            outage,
            throughput: rate * (1.0 - outage.value()),
        }
    }
}

/// Gaussian approximation of `Pr(R̄_s <= r)`. A zero-variance fit is the
/// unit step at the mean.
pub fn approx_cdf(r: f64, fit: &GaussianFit) -> Probability {
    if fit.variance > 0.0 {
        Probability::clamped(std_normal_cdf((r - fit.mean) / fit.std_dev()))
    } else if r >= fit.mean {
        Probability::ONE
    } else {
        Probability::ZERO
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("blocklength must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `p_out = Φ((B/N − m)/σ)` at blocklength `n`.
pub fn outage_probability(n: u32, cfg: &SystemConfig, mu: &MuCoefficients) -> Result<Probability> {
    check_n(n)?;
    let fit = fit_at_blocklength(mu, n as f64)?;
    Ok(approx_cdf(cfg.payload_bits as f64 / n as f64, &fit))
}

/// Effective throughput `(B/N)(1 − p_out)` at blocklength `n`.
pub fn effective_throughput(n: u32, cfg: &SystemConfig, mu: &MuCoefficients) -> Result<ThroughputPoint> {
    let outage = outage_probability(n, cfg, mu)?;
    Ok(ThroughputPoint::new(n, cfg.payload_bits as f64 / n as f64, outage))
}
