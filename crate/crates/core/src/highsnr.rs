//! Closed forms for the high-SNR regime.
//!
//! With `log₂(1+γ) ≈ log₂γ` and `V ≈ 1`, the achievable secrecy rate is
//! `log₂(γ_b/γ_e) − t/√N` with `t = (Q⁻¹(ε̄) + Q⁻¹(δ̄))/ln2`, and its CDF,
//! the outage probability and the throughput have closed forms in
//! `h(N) = B/N + t/√N`:
//!
//! `p_out = H(N)^K`, `H = 2^h/(2^h + 1)`, `T = (B/N)(1 − H^K)`.
//!
//! Every expression is evaluated through `s = 2^{-h}` so that `H^K` does not
//! round to one when `h` is large.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasible::{EmptyReason, FeasibleSet, Interval};
use crate::model::SystemConfig;
use crate::optimizer::OptimizationResult;
use crate::approx::ThroughputPoint;
use crate::specfun::Probability;

/// Upper end of the search for the sign change of `Ξ`.
const MAX_SEARCH: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighSnrParams {
    /// `t = (Q⁻¹(ε̄) + Q⁻¹(δ̄))/ln2`.
    pub t: f64,
    pub antennas: u32,
    pub payload_bits: u32,
    /// Outage threshold; `None` leaves the throughput unconstrained.
    pub zeta: Option<Probability>,
    pub max_blocklength: u32,
}

impl HighSnrParams {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let (qe, qd) = cfg.backoff_quantiles()?;
        Ok(HighSnrParams {
            t: (qe + qd) / LN_2,
            antennas: cfg.antennas,
            payload_bits: cfg.payload_bits,
            zeta: cfg.zeta,
            max_blocklength: cfg.max_blocklength,
        })
    }

    fn k(&self) -> f64 {
        self.antennas as f64
    }

    fn bits(&self) -> f64 {
        self.payload_bits as f64
    }

    /// `h(N) = B/N + t/√N`.
    pub fn h(&self, n: f64) -> f64 {
        self.bits() / n + self.t / n.sqrt()
    }

    /// `ln H(N)^K = −K ln(1 + 2^{-h})`.
    fn log_hk(&self, n: f64) -> f64 {
        -self.k() * (-self.h(n) * LN_2).exp().ln_1p()
    }

    /// `λ(N) = ln2·(B + (t/2)√N)·K`.
    pub fn lambda(&self, n: f64) -> f64 {
        LN_2 * (self.bits() + 0.5 * self.t * n.sqrt()) * self.k()
    }
}

/// `Pr(R̃_s ≤ r) = (2^{r+υ}/(2^{r+υ}+1))^K` with `υ = t/√N`.
pub fn highsnr_cdf(r: f64, n: f64, hp: &HighSnrParams) -> Probability {
    let s = (-(r + hp.t / n.sqrt()) * LN_2).exp();
    Probability::clamped((-hp.k() * s.ln_1p()).exp())
}

/// `p_out = H(N)^K`.
pub fn highsnr_outage(n: f64, hp: &HighSnrParams) -> Probability {
    Probability::clamped(hp.log_hk(n).exp())
}

/// `T = (B/N)(1 − H(N)^K)`.
pub fn highsnr_throughput(n: f64, hp: &HighSnrParams) -> f64 {
    hp.bits() / n * -hp.log_hk(n).exp_m1()
}

/// `Ξ(N) = (λ/(N(2^h + 1)) + 1)·H^K − 1`; `dT/dN = (B/N²)·Ξ`.
pub fn xi(n: f64, hp: &HighSnrParams) -> f64 {
    let s = (-hp.h(n) * LN_2).exp();
    let l1p = s.ln_1p();
    let k = hp.k();
    (hp.lambda(n) * s / (n * (1.0 + s)) - (k * l1p).exp_m1()) * (-k * l1p).exp()
}

/// `Ξ₁(N) = λ²(K − 2^h)/(K·N·(2^h + 1)) + 2λ − (ln2/4)·K·t·√N`.
pub fn xi1(n: f64, hp: &HighSnrParams) -> f64 {
    let s = (-hp.h(n) * LN_2).exp();
    let k = hp.k();
    let lam = hp.lambda(n);
    // (K − 2^h)/(2^h + 1) = (K·s − 1)/(1 + s)
    lam * lam * (k * s - 1.0) / (k * n * (1.0 + s)) + 2.0 * lam - LN_2 / 4.0 * k * hp.t * n.sqrt()
}

/// Solves `h(N) = y` for `N ≥ 1`; `h` is strictly decreasing. Returns 1 when
/// `y ≥ h(1)`.
pub fn h_inverse(y: f64, hp: &HighSnrParams) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("h takes only positive values, got {y}")));
    }
    if y >= hp.h(1.0) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while hp.h(hi) > y {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_SEARCH {
            return Err(Error::NoSignChange { limit: MAX_SEARCH });
        }
    }
    while hi - lo > 1e-9 * lo {
        let mid = 0.5 * (lo + hi);
        if hp.h(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximizer of the unconstrained high-SNR throughput.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconstrainedOptimum {
    /// Root `N*` of `Ξ` on the relaxed, real blocklength.
    pub n_star: f64,
    /// Better of `⌊N*⌋` and `⌈N*⌉`.
    pub n_int: u32,
    pub throughput: f64,
    pub diagnostics: Vec<String>,
}

/// `x` beats `y` if its throughput is larger by more than 1e-15 relative;
/// otherwise the smaller blocklength wins.
fn prefer(x: (u32, f64), y: (u32, f64)) -> (u32, f64) {
    let tol = 1e-15 * x.1.abs().max(y.1.abs());
    if (x.1 - y.1).abs() <= tol {
        if x.0 <= y.0 {
            x
        } else {
            y
        }
    } else if x.1 > y.1 {
        x
    } else {
        y
    }
}

fn best_of(a: u32, b: u32, hp: &HighSnrParams) -> (u32, f64) {
    prefer(
        (a, highsnr_throughput(a as f64, hp)),
        (b, highsnr_throughput(b as f64, hp)),
    )
}

/// Root of `Ξ` by bisection after bracketing from `[1, 2]` by doubling.
pub fn unconstrained_optimum(hp: &HighSnrParams) -> Result<UnconstrainedOptimum> {
    let mut diagnostics = Vec::new();
    if hp.payload_bits < 50 {
        diagnostics.push(format!(
            "B = {} is below 50; uniqueness of the stationary point is not guaranteed",
            hp.payload_bits
        ));
    }
    if xi(1.0, hp) <= 0.0 {
        diagnostics.push("Xi(1) <= 0: throughput already decreasing at N = 1".into());
        return Ok(UnconstrainedOptimum {
            n_star: 1.0,
            n_int: 1,
            throughput: highsnr_throughput(1.0, hp),
            diagnostics,
        });
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while xi(hi, hp) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_SEARCH {
            return Err(Error::NoSignChange { limit: MAX_SEARCH });
        }
    }
    let n_star = loop {
        let mid = 0.5 * (lo + hi);
        let v = xi(mid, hp);
        if v.abs() <= 1e-12 || hi - lo <= 1e-9 * mid || mid <= lo || mid >= hi {
            break mid;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    };
    let floor = (n_star.floor() as u32).max(1);
    let ceil = (n_star.ceil() as u32).max(1);
    let (n_int, throughput) = best_of(floor, ceil, hp);
    Ok(UnconstrainedOptimum {
        n_star,
        n_int,
        throughput,
        diagnostics,
    })
}

/// `N₀ = 4B²/(√Δ₂ − t)²`, the smallest real blocklength meeting
/// `H(N)^K ≤ ζ`. `None` when `ζ^{1/K} ≤ 1/2`.
pub fn outage_floor_blocklength(zeta: Probability, hp: &HighSnrParams) -> Option<f64> {
    let root = (zeta.value().ln() / hp.k()).exp();
    if root <= 0.5 || root >= 1.0 {
        return (root >= 1.0).then_some(0.0);
    }
    let l = (root / (1.0 - root)).log2();
    let delta2 = hp.t * hp.t + 4.0 * hp.bits() * l;
    // √Δ₂ − t = 4Bl/(√Δ₂ + t)
    let s = delta2.sqrt() + hp.t;
    Some(s * s / (4.0 * l * l))
}

fn point(n: u32, hp: &HighSnrParams) -> ThroughputPoint {
    ThroughputPoint::new(n, hp.bits() / n as f64, highsnr_outage(n as f64, hp))
}

/// Throughput-optimal integer blocklength under `H(N)^K ≤ ζ` and
/// `N ≤ N_G`.
pub fn constrained_optimum(hp: &HighSnrParams) -> Result<OptimizationResult> {
    let n_g = hp.max_blocklength;
    let unc = unconstrained_optimum(hp)?;
    let mut diagnostics = unc.diagnostics.clone();
    let mut evaluations = 2;

    let n0_int = match hp.zeta {
        None => 1,
        Some(zeta) => {
            let floor_level = (-hp.k() * LN_2).exp();
            if (zeta.value() - floor_level).abs() < 1e-12 {
                diagnostics.push(
                    "zeta is within 1e-12 of 2^-K; the boundary is treated as infeasible".into(),
                );
            }
            let Some(n0) = outage_floor_blocklength(zeta, hp) else {
                let mut r = OptimizationResult::absent(
                    FeasibleSet::empty(EmptyReason::ThresholdBelowFloor),
                    evaluations,
                    EmptyReason::ThresholdBelowFloor.to_string(),
                );
                r.diagnostics = diagnostics;
                return Ok(r);
            };
            let z = zeta.value();
            let meets = |n: u32| highsnr_outage(n as f64, hp).value() <= z;
            // ⌈N₀⌉, corrected against the outage itself for rounding in N₀.
            let mut n0_int = if n0 > n_g as f64 + 1.0 { n_g + 1 } else { (n0.ceil() as u32).max(1) };
            while n0_int > 1 && meets(n0_int - 1) {
                n0_int -= 1;
                evaluations += 1;
            }
            while n0_int <= n_g && !meets(n0_int) {
                n0_int += 1;
                evaluations += 1;
            }
            if n0_int > n_g {
                let mut r = OptimizationResult::absent(
                    FeasibleSet::empty(EmptyReason::ConstraintUnsatisfiable),
                    evaluations,
                    EmptyReason::ConstraintUnsatisfiable.to_string(),
                );
                r.diagnostics = diagnostics;
                return Ok(r);
            }
            n0_int
        }
    };

    let clamp = |n: f64| (n.max(1.0) as u32).clamp(n0_int, n_g);
    let (n_opt, _) = best_of(clamp(unc.n_star.floor()), clamp(unc.n_star.ceil()), hp);
    evaluations += 2;
    let feasible = FeasibleSet::from_intervals(vec![Interval::closed(n0_int as f64, n_g as f64)], None);
    let mut r = OptimizationResult::found(point(n_opt, hp), feasible, evaluations);
    r.diagnostics = diagnostics;
    r.diagnostics.push(format!("N* = {:.6}", unc.n_star));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::best_point;

    fn hp(t: f64, k: u32, b: u32, zeta: Option<f64>, n_g: u32) -> HighSnrParams {
        HighSnrParams {
            t,
            antennas: k,
            payload_bits: b,
            zeta: zeta.map(|z| Probability::new(z).unwrap()),
            max_blocklength: n_g,
        }
    }

    fn paper() -> HighSnrParams {
        HighSnrParams::from_config(&SystemConfig::default()).unwrap()
    }

    #[test]
    fn cdf_special_values() {
        let p = hp(3.0, 1, 400, None, 1000);
        let n = 100.0;
        let upsilon = 3.0 / 10.0;
        assert!((highsnr_cdf(-upsilon, n, &p).value() - 0.5).abs() < 1e-15);
        assert_eq!(highsnr_cdf(1e6, n, &p).value(), 1.0);
        assert_eq!(highsnr_cdf(-1e6, n, &p).value(), 0.0);
    }

    #[test]
    fn outage_special_values() {
        let p = hp(0.0, 1, 400, None, 1000);
        assert!((highsnr_outage(400.0, &p).value() - 2.0 / 3.0).abs() < 1e-15);
        let p = hp(8.9, 8, 400, None, 1000);
        assert!((highsnr_outage(1e15, &p).value() - 0.5f64.powi(8)).abs() < 1e-7);
        let mut prev = 1.0;
        for i in 0..4000 {
            let n = 1.0 + 0.5 * i as f64;
            let v = highsnr_outage(n, &p).value();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn large_payload_at_unit_blocklength() {
        let p = hp(8.9, 8, 800, None, 1000);
        assert!(xi(1.0, &p) > 0.0);
        assert!(highsnr_throughput(1.0, &p) > 0.0);
    }

    #[test]
    fn xi_endpoints() {
        let p = paper();
        for b in [50, 100, 400, 800] {
            let q = HighSnrParams { payload_bits: b, ..p };
            assert!(xi(1.0, &q) > 0.0);
            // H^K tends to 2^-K, so the limit is 2^-K - 1.
            let limit = 0.5f64.powi(q.antennas as i32) - 1.0;
            assert!((xi(1e12, &q) - limit).abs() < 1e-3);
        }
        let wide = HighSnrParams { antennas: 16, ..p };
        assert!((xi(1e12, &wide) + 1.0).abs() < 1e-3);
    }

    #[test]
    fn xi_is_scaled_throughput_derivative() {
        let p = paper();
        for n in [20.0, 90.0, 300.0] {
            let dh = 1e-4 * n;
            let fd = (highsnr_throughput(n + dh, &p) - highsnr_throughput(n - dh, &p)) / (2.0 * dh);
            let want = p.bits() / (n * n) * xi(n, &p);
            assert!((fd - want).abs() <= 1e-6 * want.abs().max(1e-6), "{fd} vs {want}");
        }
    }

    #[test]
    fn xi1_sign_structure() {
        for t in [2.0, 8.9, 15.0] {
            for k in [2, 4, 8, 16] {
                for b in [100, 400, 800] {
                    let p = hp(t, k, b, None, 1000);
                    let n1 = h_inverse((k as f64).log2(), &p).unwrap();
                    assert!(xi1(1.0, &p) < 0.0);
                    assert!(xi1(n1, &p) > 0.0, "t={t} K={k} B={b}");
                }
            }
        }
    }

    #[test]
    fn unconstrained_beats_integer_grid() {
        let p = paper();
        let opt = unconstrained_optimum(&p).unwrap();
        assert!(xi(opt.n_star, &p).abs() < 1e-9 || opt.n_star > 1.0);
        for n in 1..=10 * opt.n_int {
            assert!(highsnr_throughput(n as f64, &p) <= opt.throughput, "N = {n}");
        }
    }

    #[test]
    fn floor_blocklength_examples() {
        let p = hp(0.0, 1, 400, Some(0.8), 1000);
        let n0 = outage_floor_blocklength(Probability::new(0.8).unwrap(), &p).unwrap();
        assert!((n0 - 200.0).abs() < 1e-9);

        let p = hp(0.0, 8, 400, Some(0.2), 1000);
        let n0 = outage_floor_blocklength(Probability::new(0.2).unwrap(), &p).unwrap();
        let first = (1..).find(|&n| highsnr_outage(n as f64, &p).value() <= 0.2).unwrap();
        assert_eq!(n0.ceil() as u32, first);
        let opt = constrained_optimum(&p).unwrap();
        let n = opt.n_opt.unwrap();
        assert!(n >= first);
        if unconstrained_optimum(&p).unwrap().n_star < n0 {
            assert_eq!(n, first);
        }
    }

    #[test]
    fn strict_threshold_is_absent() {
        let k = 8;
        let z = 0.5f64.powi(k as i32) - 1e-9;
        let opt = constrained_optimum(&hp(8.9, k, 400, Some(z), 1000)).unwrap();
        assert!(opt.n_opt.is_none());
        assert_eq!(opt.reason.as_deref(), Some("outage threshold below 2^-K"));

        let z = 0.5f64.powi(k as i32);
        let opt = constrained_optimum(&hp(8.9, k, 400, Some(z), 1000)).unwrap();
        assert!(opt.n_opt.is_none());
        assert!(opt.diagnostics.iter().any(|d| d.contains("2^-K")));
    }

    #[test]
    fn constrained_matches_scan() {
        for (t, k, b, z, n_g) in [
            (8.9, 8, 400, Some(0.2), 1000),
            (8.9, 8, 400, Some(0.01), 1000),
            (2.0, 2, 800, Some(0.3), 200),
            (12.0, 16, 100, None, 50),
            (5.0, 4, 300, Some(0.07), 1000),
        ] {
            let p = hp(t, k, b, z, n_g);
            let zeta = z.unwrap_or(1.0);
            let want = best_point((1..=n_g).map(|n| point(n, &p)).filter(|q| q.outage.value() <= zeta));
            let got = constrained_optimum(&p).unwrap();
            assert_eq!(got.n_opt, want.map(|q| q.blocklength), "{t} {k} {b} {z:?} {n_g}");
        }
    }
}
