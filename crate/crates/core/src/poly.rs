//! Small real-polynomial utilities. Coefficients are highest degree first.

use num_complex::Complex64;

pub(crate) fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len().saturating_sub(1);
    coeffs[..deg]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (deg - i) as f64)
        .collect()
}

/// Bisection on a bracket where `f(lo)` and `f(hi)` have strictly opposite
/// signs. Runs until the midpoint no longer moves or the bracket is within
/// `rel_tol` relative width.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= rel_tol * mid.abs() {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upper bound on the modulus of every root (Cauchy).
pub(crate) fn cauchy_bound(coeffs: &[f64]) -> f64 {
    let lead = coeffs[0].abs();
    1.0 + coeffs[1..]
        .iter()
        .map(|c| c.abs() / lead)
        .fold(0.0, f64::max)
}

/// All complex roots of a polynomial by Aberth–Ehrlich iteration.
pub(crate) fn complex_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let eval_c = |z: Complex64, cs: &[f64]| {
        cs.iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let d = derivative(coeffs);
    let radius = cauchy_bound(coeffs);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..deg {
            let p = eval_c(z[i], coeffs);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / eval_c(z[i], &d);
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}
