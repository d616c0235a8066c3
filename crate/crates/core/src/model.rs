//! Scenario configuration, SNR distributions and per-realization
//! finite-blocklength rate formulas.
//!
//! All SNRs are on the linear scale. Blocklengths are taken as `f64` here so
//! the analytic code can treat `N` as a continuous variable; integrality is
//! enforced by the optimizers.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{q_inverse, Probability};

/// Converts a power ratio in dB to the linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Parameters of one transmission scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of transmit antennas `K`.
    pub antennas: u32,
    /// Average SNR, linear scale. Legitimate and eavesdropper links share it.
    pub mean_snr: f64,
    /// Reliability constraint: tolerated decoding error probability.
    pub eps_bar: Probability,
    /// Secrecy constraint: tolerated information leakage.
    pub delta_bar: Probability,
    /// Outage threshold. `None` removes the outage constraint.
    pub zeta: Option<Probability>,
    /// Confidential bits per packet `B`.
    pub payload_bits: u32,
    /// Largest admissible blocklength `N_G`.
    pub max_blocklength: u32,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            antennas: 8,
            mean_snr: db_to_linear(10.0),
            eps_bar: Probability::clamped(1e-3),
            delta_bar: Probability::clamped(1e-3),
            zeta: Some(Probability::clamped(0.2)),
            payload_bits: 400,
            max_blocklength: 1000,
        }
    }
}

impl SystemConfig {
    pub fn with_mean_snr_db(mut self, db: f64) -> Self {
        self.mean_snr = db_to_linear(db);
        self
    }

    pub fn mean_snr_db(&self) -> f64 {
        linear_to_db(self.mean_snr)
    }

    /// Checks every invariant and names the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.antennas < 1 {
            return fail("antennas (K) must be at least 1".into());
        }
        if !(self.mean_snr.is_finite() && self.mean_snr > 0.0) {
            return fail(format!(
                "mean SNR must be positive and finite, got {}",
                self.mean_snr
            ));
        }
        for (name, p) in [("eps_bar", self.eps_bar), ("delta_bar", self.delta_bar)] {
            if !(p.value() > 0.0 && p.value() <= 0.5) {
                return fail(format!("{name} must lie in (0, 0.5], got {p}"));
            }
        }
        if let Some(z) = self.zeta {
            if !(z.value() > 0.0 && z.value() <= 0.5) {
                return fail(format!("zeta must lie in (0, 0.5], got {z}"));
            }
        }
        if self.payload_bits < 1 {
            return fail("payload_bits (B) must be at least 1".into());
        }
        if self.max_blocklength < 1 {
            return fail("max_blocklength (N_G) must be at least 1".into());
        }
        Ok(())
    }

    /// `Q⁻¹(ε̄)` and `Q⁻¹(δ̄)`.
    pub fn backoff_quantiles(&self) -> Result<(f64, f64)> {
        Ok((q_inverse(self.eps_bar.value())?, q_inverse(self.delta_bar.value())?))
    }
}

/// Instantaneous SNRs of one fading realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub gamma_b: f64,
    pub gamma_e: f64,
}

impl ChannelGains {
    pub fn new(gamma_b: f64, gamma_e: f64) -> Self {
        debug_assert!(gamma_b >= 0.0 && gamma_e >= 0.0);
        ChannelGains { gamma_b, gamma_e }
    }
}

/// Converse side of the second-order rate bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConverseBound {
    Value(f64),
    /// The combined dispersion is negative (happens when `γ_b < γ_e`).
    NegativeDispersion { dispersion: f64 },
    /// `ε + δ >= 1`, so `Q⁻¹(ε + δ)` is undefined.
    NotApplicable,
}

impl ConverseBound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ConverseBound::Value(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple {
    pub achievable: f64,
    pub upper: ConverseBound,
    pub capacity: f64,
}

/// Density of `γ_b ~ Gamma(K, γ̄)`.
pub fn snr_pdf_legitimate(x: f64, cfg: &SystemConfig) -> f64 {
    gamma_pdf(x, cfg.antennas, cfg.mean_snr)
}

/// Density of `γ_e ~ Exp(1/γ̄)`.
pub fn snr_pdf_eavesdropper(y: f64, cfg: &SystemConfig) -> f64 {
    gamma_pdf(y, 1, cfg.mean_snr)
}

/// Gamma density with integer shape, evaluated in log space.
pub(crate) fn gamma_pdf(x: f64, shape: u32, scale: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if shape == 1 { 1.0 / scale } else { 0.0 };
    }
    let k = shape as f64;
    let log_fact: f64 = (1..shape).map(|i| (i as f64).ln()).sum();
    ((k - 1.0) * x.ln() - x / scale - k * scale.ln() - log_fact).exp()
}

/// `log₂(1 + γ)`.
#[inline]
pub fn capacity(gamma: f64) -> f64 {
    gamma.ln_1p() / LN_2
}

/// `C_s = log₂(1+γ_b) − log₂(1+γ_e)`; negative when Eve's link is stronger.
pub fn secrecy_capacity(g: ChannelGains) -> f64 {
    capacity(g.gamma_b) - capacity(g.gamma_e)
}

/// Channel dispersion `V = 1 − (1+γ)⁻²`.
#[inline]
pub fn dispersion(gamma: f64) -> f64 {
    -(-2.0 * gamma.ln_1p()).exp_m1()
}

/// Achievable secrecy rate with precomputed `Q⁻¹(ε)` and `Q⁻¹(δ)`.
#[inline]
pub fn achievable_secrecy_rate_with(g: ChannelGains, n: f64, q_eps: f64, q_delta: f64) -> f64 {
    let backoff = (dispersion(g.gamma_b).sqrt() * q_eps + dispersion(g.gamma_e).sqrt() * q_delta)
        / (LN_2 * n.sqrt());
    secrecy_capacity(g) - backoff
}

/// Achievable secrecy rate `R̄_s` at blocklength `n` under error
/// probability `eps` and leakage `delta`.
pub fn achievable_secrecy_rate(
    g: ChannelGains,
    n: f64,
    eps: Probability,
    delta: Probability,
) -> Result<f64> {
    check_blocklength(n)?;
    Ok(achievable_secrecy_rate_with(
        g,
        n,
        q_inverse(eps.value())?,
        q_inverse(delta.value())?,
    ))
}

/// Reliability and secrecy parts of `R̄_s = ℜ_b − ℜ_e`.
pub fn rate_components(g: ChannelGains, n: f64, q_eps: f64, q_delta: f64) -> (f64, f64) {
    let p = q_eps / (LN_2 * n.sqrt());
    let q = q_delta / (LN_2 * n.sqrt());
    (
        capacity(g.gamma_b) - p * dispersion(g.gamma_b).sqrt(),
        capacity(g.gamma_e) + q * dispersion(g.gamma_e).sqrt(),
    )
}

/// Achievability value, converse value and secrecy capacity together.
pub fn rate_bounds(g: ChannelGains, n: f64, eps: Probability, delta: Probability) -> Result<RateTriple> {
    let achievable = achievable_secrecy_rate(g, n, eps, delta)?;
    let capacity = secrecy_capacity(g);
    let budget = eps.value() + delta.value();
    let upper = if budget >= 1.0 || budget <= 0.0 {
        ConverseBound::NotApplicable
    } else {
        let v1 = dispersion(g.gamma_b);
        let v2 = dispersion(g.gamma_e);
        let v3 = v1 + v2 - 2.0 * ((1.0 + g.gamma_e) / (1.0 + g.gamma_b)) * v2;
        if v3 < 0.0 {
            ConverseBound::NegativeDispersion { dispersion: v3 }
        } else {
            ConverseBound::Value(capacity - (v3 / n).sqrt() * q_inverse(budget)? / LN_2)
        }
    };
    Ok(RateTriple {
        achievable,
        upper,
        capacity,
    })
}

pub(crate) fn check_blocklength(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("blocklength must be finite and >= 1, got {n}")))
    }
}
