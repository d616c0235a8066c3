//! Moment integrals of the per-link rate terms and the Gaussian fit of the
//! achievable secrecy rate they induce.
//!
//! For one link with SNR `γ`, the five integrals are the expectations of
//! `C(γ)`, `√V(γ)`, `C(γ)²`, `2C(γ)√V(γ)` and `V(γ)`, where
//! `C = log₂(1+γ)` and `V = 1 − (1+γ)⁻²`. The legitimate link has
//! `γ ~ Gamma(K, γ̄)`, the eavesdropper `γ ~ Exp(1/γ̄)`. None of them
//! depends on the blocklength, so they are computed once per `(K, γ̄)`.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{capacity, dispersion, SystemConfig};
use crate::quadrature;
use crate::specfun::{q_inverse, Probability};

/// Default relative tolerance of the moment integrals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tail cutoff in units of `γ̄`: density mass beyond it is far below 1e-14.
fn upper_limit(shape: u32) -> f64 {
    let k = shape as f64;
    k + 40.0 * k.sqrt()
}

/// The five moment integrals of one link, indexed 0..=4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideMoments(pub [f64; 5]);

impl SideMoments {
    pub fn mean_capacity(&self) -> f64 {
        self.0[0]
    }

    /// Variance of `C(γ) + s·√V(γ)` for a signed backoff `s`.
    pub fn variance_with_backoff(&self, s: f64) -> f64 {
        let [m0, m1, m2, m3, m4] = self.0;
        (m4 - m1 * m1) * s * s + (m3 - 2.0 * m0 * m1) * s + m2 - m0 * m0
    }
}

impl std::ops::Index<usize> for SideMoments {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Moments of both links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub legitimate: SideMoments,
    pub eavesdropper: SideMoments,
}

impl MomentSet {
    pub fn compute(cfg: &SystemConfig, tol: f64) -> Result<Self> {
        Ok(MomentSet {
            legitimate: legitimate_moments(cfg, tol)?,
            eavesdropper: eavesdropper_moments(cfg, tol)?,
        })
    }

    pub fn mu(&self, eps: Probability, delta: Probability) -> Result<MuCoefficients> {
        mu_coefficients(&self.legitimate, &self.eavesdropper, eps, delta)
    }
}

fn side_moments(shape: u32, scale: f64, tol: f64, what: &str) -> Result<SideMoments> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("mean SNR must be positive, got {scale}")));
    }
    let k = shape as f64;
    let log_norm: f64 = (1..shape).map(|i| (i as f64).ln()).sum();
    // Integrate over u = γ/γ̄ against the unit-scale Gamma(K) density.
    let integrand = |u: f64| {
        let density = if shape == 1 {
            (-u).exp()
        } else {
            ((k - 1.0) * u.ln() - u - log_norm).exp()
        };
        let x = scale * u;
        let c = capacity(x);
        let v = dispersion(x);
        let sv = v.sqrt();
        [c, sv, c * c, 2.0 * c * sv, v].map(|f| f * density)
    };
    quadrature::integrate(integrand, 0.0, upper_limit(shape), tol, what).map(SideMoments)
}

/// `p₀..p₄` against the `Gamma(K, γ̄)` density of the legitimate SNR.
pub fn legitimate_moments(cfg: &SystemConfig, tol: f64) -> Result<SideMoments> {
    side_moments(cfg.antennas, cfg.mean_snr, tol, "legitimate moments")
}

/// `q₀..q₄` against the `Exp(1/γ̄)` density of the eavesdropper SNR.
pub fn eavesdropper_moments(cfg: &SystemConfig, tol: f64) -> Result<SideMoments> {
    side_moments(1, cfg.mean_snr, tol, "eavesdropper moments")
}

/// Coefficients that carry all blocklength dependence of the fit:
/// `mean = μ₀ − μ₁/√N`, `variance = μ₂ + μ₃/√N + μ₄/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuCoefficients {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
}

pub fn mu_coefficients(
    p: &SideMoments,
    q: &SideMoments,
    eps: Probability,
    delta: Probability,
) -> Result<MuCoefficients> {
    let qe = q_inverse(eps.value())?;
    let qd = q_inverse(delta.value())?;
    let [p0, p1, p2, p3, p4] = p.0;
    let [q0, q1, q2, q3, q4] = q.0;
    Ok(MuCoefficients {
        mu0: p0 - q0,
        mu1: (p1 * qe + q1 * qd) / LN_2,
        mu2: p2 - p0 * p0 + q2 - q0 * q0,
        mu3: ((2.0 * p0 * p1 - p3) * qe - (2.0 * q0 * q1 - q3) * qd) / LN_2,
        mu4: ((p4 - p1 * p1) * qe * qe + (q4 - q1 * q1) * qd * qd) / (LN_2 * LN_2),
    })
}

/// Mean and variance of the Gaussian fit to `R̄_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianFit {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn fit_at_blocklength(mu: &MuCoefficients, n: f64) -> Result<GaussianFit> {
    crate::model::check_blocklength(n)?;
    let root = n.sqrt();
    let mean = mu.mu0 - mu.mu1 / root;
    let variance = mu.mu4 / n + mu.mu3 / root + mu.mu2;
    if variance < -1e-12 {
        return Err(Error::Invariant(format!(
            "negative fitted variance {variance:e} at N = {n}"
        )));
    }
    Ok(GaussianFit {
        mean,
        variance: variance.max(0.0),
    })
}

/// Memoizes [`MomentSet`]s per `(K, γ̄, tol)`. Reads run concurrently,
/// inserts are serialized.
#[derive(Debug, Default)]
pub struct MomentCache {
    entries: RwLock<HashMap<(u32, u64, u64), MomentSet>>,
}

impl MomentCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, cfg: &SystemConfig, tol: f64) -> Result<MomentSet> {
        let key = (cfg.antennas, cfg.mean_snr.to_bits(), tol.to_bits());
        if let Some(m) = self.entries.read().expect("moment cache poisoned").get(&key) {
            return Ok(*m);
        }
        let computed = MomentSet::compute(cfg, tol)?;
        self.entries
            .write()
            .expect("moment cache poisoned")
            .entry(key)
            .or_insert(computed);
        Ok(computed)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("moment cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
