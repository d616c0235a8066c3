//! Scalar special functions: the standard normal CDF and the inverse of the
//! Gaussian Q-function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);
    pub const HALF: Probability = Probability(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!("probability {value} outside [0, 1]")))
        }
    }

    /// Clamps a floating value into `[0, 1]`. NaN maps to 1.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Probability(1.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Standard normal CDF `Φ(x)`.
///
/// Evaluated through `erfc` on the side that avoids cancellation, so both
/// tails keep full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

/// Gaussian Q-function `Q(x) = 1 - Φ(x)`, accurate in the upper tail.
pub fn q_function(x: f64) -> f64 {
    std_normal_cdf(-x)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

// Rational initializer for the normal quantile (P. J. Acklam), relative
// error about 1.15e-9 before refinement.
const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const ACKLAM_P_LOW: f64 = 0.02425;

/// Lower-half quantile: `p` in `(0, 0.5]`, returns `x <= 0` with `Φ(x) = p`.
fn lower_quantile(p: f64) -> f64 {
    let x0 = if p < ACKLAM_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        let c = &ACKLAM_C;
        let d = &ACKLAM_D;
        (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        let a = &ACKLAM_A;
        let b = &ACKLAM_B;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    };
    // One Newton step on Φ(x) - p. x0 <= 0 here so Φ is evaluated in its
    // accurate (lower) tail.
    let residual = std_normal_cdf(x0) - p;
    x0 - residual / std_normal_pdf(x0)
}

/// Standard normal quantile `Φ⁻¹(p)` for `p` in `(0, 1)`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    if p <= 0.5 {
        Ok(lower_quantile(p))
    } else {
        // 1 - p is exact for p in [0.5, 1).
        Ok(-lower_quantile(1.0 - p))
    }
}

/// Inverse Gaussian Q-function: returns `x` with `Q(x) = p`.
pub fn q_inverse(p: f64) -> Result<f64> {
    std_normal_quantile(p).map(|x| -x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basic_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() <= 1e-15);
        assert_eq!(std_normal_cdf(-40.0), 0.0);
    }

    #[test]
    fn cdf_symmetry() {
        for i in -600..=600 {
            let x = i as f64 / 50.0;
            let s = std_normal_cdf(-x) + std_normal_cdf(x);
            assert!((s - 1.0).abs() <= 1e-14, "x = {x}");
        }
    }

    #[test]
    fn q_inverse_median_and_domain() {
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        assert!(q_inverse(0.0).is_err());
        assert!(q_inverse(1.0).is_err());
        assert!(q_inverse(-0.1).is_err());
        assert!(q_inverse(f64::NAN).is_err());
    }

    #[test]
    fn q_inverse_symmetry() {
        for &p in &[1e-9, 1e-5, 1e-3, 0.01, 0.1, 0.3, 0.49] {
            let a = q_inverse(p).unwrap();
            let b = q_inverse(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-7, "p = {p}: {a} vs {b}");
        }
    }

    #[test]
    fn q_inverse_round_trip_deep_tail() {
        for k in 1..=12 {
            let p = 10f64.powi(-k);
            let x = q_inverse(p).unwrap();
            let err = (q_function(x) - p).abs();
            assert!(err <= 1e-12 * p.max(1e-6), "p = {p}, err = {err}");
        }
    }

    #[test]
    fn probability_validation() {
        assert!(Probability::new(-1e-12).is_err());
        assert!(Probability::new(1.0 + 1e-12).is_err());
        assert_eq!(Probability::clamped(1.5).value(), 1.0);
        assert_eq!(Probability::clamped(-0.2).value(), 0.0);
        assert_eq!(Probability::try_from(0.25).unwrap().value(), 0.25);
    }
}
