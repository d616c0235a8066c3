//! Globally adaptive Gauss–Legendre quadrature over a finite interval.
//!
//! Each panel is integrated with a 20-point and a 10-point Gauss–Legendre
//! rule; their difference is the panel error estimate. The panel with the
//! largest error relative to the requested tolerance is bisected until every
//! component meets it.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const MAX_PANELS: usize = 20_000;

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Legendre nodes/weights on [-1, 1] by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(20), gauss_legendre(10)))
}

#[derive(Clone)]
struct Panel<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: [f64; M],
}

fn apply<const M: usize, F: Fn(f64) -> [f64; M]>(f: &F, a: f64, b: f64, rule: &Rule) -> [f64; M] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; M];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(mid + half * x);
        for (s, vi) in acc.iter_mut().zip(v) {
            *s += w * vi;
        }
    }
    acc.map(|s| s * half)
}

fn panel<const M: usize, F: Fn(f64) -> [f64; M]>(f: &F, a: f64, b: f64) -> Panel<M> {
    let (fine, coarse) = rules();
    let value = apply(f, a, b, fine);
    let low = apply(f, a, b, coarse);
    let mut error = [0.0; M];
    for i in 0..M {
        error[i] = (value[i] - low[i]).abs();
    }
    Panel { a, b, value, error }
}

/// Integrates the `M` components of `f` over `[a, b]` to relative tolerance
/// `rel_tol` per component.
pub(crate) fn integrate<const M: usize, F>(f: F, a: f64, b: f64, rel_tol: f64, what: &str) -> Result<[f64; M]>
where
    F: Fn(f64) -> [f64; M],
{
    const INITIAL: usize = 8;
    let width = (b - a) / INITIAL as f64;
    let mut panels: Vec<Panel<M>> = (0..INITIAL)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL { b } else { lo + width };
            panel(&f, lo, hi)
        })
        .collect();

    loop {
        let mut total = [0.0; M];
        let mut err = [0.0; M];
        for p in &panels {
            for i in 0..M {
                total[i] += p.value[i];
                err[i] += p.error[i];
            }
        }
        if let Some(i) = (0..M).find(|&i| !(total[i].is_finite() && err[i].is_finite())) {
            return Err(Error::Quadrature {
                what: format!("{what} (non-finite integrand)"),
                estimate: total[i],
                error: err[i],
                panels: panels.len(),
            });
        }
        let allowed = total.map(|t| (rel_tol * t.abs()).max(f64::MIN_POSITIVE));
        if (0..M).all(|i| err[i] <= allowed[i]) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            let worst = (0..M)
                .max_by(|&i, &j| (err[i] / allowed[i]).total_cmp(&(err[j] / allowed[j])))
                .unwrap_or(0);
            return Err(Error::Quadrature {
                what: what.to_string(),
                estimate: total[worst],
                error: err[worst],
                panels: panels.len(),
            });
        }
        let score = |p: &Panel<M>| {
            (0..M)
                .map(|i| p.error[i] / allowed[i])
                .fold(0.0f64, f64::max)
        };
        let (idx, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, score(p)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("at least one panel");
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                what: format!("{what} (panel collapsed near {mid:e})"),
                estimate: total[0],
                error: err[0],
                panels: panels.len() + 1,
            });
        }
        panels.push(panel(&f, p.a, mid));
        panels.push(panel(&f, mid, p.b));
    }
}
