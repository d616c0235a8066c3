//! Explicit blocklength set satisfying the outage constraint under the
//! Gaussian fit.
//!
//! With `n = 1/√N`, `p_out ≤ ζ` (for `ζ ≤ 0.5`) holds exactly when both
//!
//! * `B n² + μ₁ n − μ₀ < 0`, i.e. `N > N_L`, and
//! * `g(n) = a n⁴ + b n³ + c n² + d n + e ≥ 0`
//!
//! hold. The second set is found by isolating the positive real roots of the
//! quartic `g`: the real roots of `g′` (Cardano) split `(0, ∞)` into
//! monotone pieces, each of which holds at most one root, found by
//! bisection. [`feasible_blocklengths_by_cases`] derives the same set from
//! the case analysis of `g`'s shape and is kept as a cross-check.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::moments::MuCoefficients;
use crate::poly;
use crate::specfun::{std_normal_quantile, Probability};

/// Relative bisection tolerance on roots of `g`.
const ROOT_REL_TOL: f64 = 1e-15;
/// `g ≥ 0` pieces narrower than this in `n` are treated as roundoff.
const MIN_WIDTH_N: f64 = 1e-9;
/// Largest accepted imaginary residue of a Cardano root.
const MAX_IMAG_RESIDUE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl QuarticCoeffs {
    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    pub fn eval(&self, n: f64) -> f64 {
        poly::eval(&self.as_array(), n)
    }

    pub fn eval_derivative(&self, n: f64) -> f64 {
        (((4.0 * self.a * n) + 3.0 * self.b) * n + 2.0 * self.c) * n + self.d
    }
}

/// Coefficients of `g` for payload `bits`, threshold `zeta` and fit `mu`.
pub fn quartic_coefficients_for(bits: f64, zeta: Probability, mu: &MuCoefficients) -> Result<QuarticCoeffs> {
    let z = std_normal_quantile(zeta.value())?;
    let z2 = z * z;
    Ok(QuarticCoeffs {
        a: bits * bits,
        b: 2.0 * bits * mu.mu1,
        c: mu.mu1 * mu.mu1 - 2.0 * bits * mu.mu0 - z2 * mu.mu4,
        d: -2.0 * mu.mu0 * mu.mu1 - z2 * mu.mu3,
        e: mu.mu0 * mu.mu0 - z2 * mu.mu2,
    })
}

pub fn quartic_coefficients(cfg: &SystemConfig, mu: &MuCoefficients) -> Result<QuarticCoeffs> {
    let zeta = cfg
        .zeta
        .ok_or_else(|| Error::Domain("no outage threshold configured".into()))?;
    quartic_coefficients_for(cfg.payload_bits as f64, zeta, mu)
}

/// Real stationary points of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoints {
    /// Largest real root of `g′`.
    pub t_g: f64,
    /// Second largest real root of `g′`, if `g′` has more than one.
    pub t_l: Option<f64>,
    /// Positive root of `g″`, present when `c < 0`.
    pub t_0: Option<f64>,
    /// Every real root of `g′`, ascending, with multiplicity.
    pub roots: Vec<f64>,
}

/// Real roots of `g′(n) = 4a n³ + 3b n² + 2c n + d` by Cardano's formula.
///
/// Requires `a > 0`.
pub fn derivative_critical_points(q: &QuarticCoeffs) -> CriticalPoints {
    let QuarticCoeffs { a, b, c, d, .. } = *q;
    debug_assert!(a > 0.0);
    let shift = -b / (4.0 * a);
    let u = (8.0 * a * c - 3.0 * b * b) / (16.0 * a * a);
    let v = (8.0 * a * a * d - 4.0 * a * b * c + b * b * b) / (32.0 * a * a * a);
    let disc = v * v / 4.0 + u * u * u / 27.0;

    let mut roots = Vec::with_capacity(3);
    if disc > 0.0 {
        // One real root. Take the cube root of the larger-magnitude term and
        // recover the other from their product −u/3.
        let s = disc.sqrt();
        let big = if v > 0.0 { -v / 2.0 - s } else { -v / 2.0 + s };
        let c1 = big.cbrt();
        let c2 = if c1 != 0.0 { -u / (3.0 * c1) } else { 0.0 };
        roots.push(shift + c1 + c2);
    } else {
        let z = Complex64::new(-v / 2.0, (-disc).sqrt());
        let c1 = z.cbrt();
        let c2 = if c1.norm() > 0.0 {
            Complex64::new(-u / 3.0, 0.0) / c1
        } else {
            Complex64::new(0.0, 0.0)
        };
        let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let w2 = w * w;
        let scale = c1.norm().max(1.0);
        for t in [c1 + c2, w * c1 + w2 * c2, w2 * c1 + w * c2] {
            if t.im.abs() <= MAX_IMAG_RESIDUE * scale {
                roots.push(shift + t.re);
            }
        }
    }

    for r in roots.iter_mut() {
        *r = polish(*r, |x| q.eval_derivative(x), |x| {
            (12.0 * a * x + 6.0 * b) * x + 2.0 * c
        });
    }
    roots.sort_by(f64::total_cmp);

    let t_g = *roots.last().expect("a real cubic has a real root");
    let t_l = (roots.len() >= 2).then(|| roots[roots.len() - 2]);
    let t_0 = (c < 0.0).then(|| ((9.0 * b * b - 24.0 * a * c).sqrt() - 3.0 * b) / (12.0 * a));
    CriticalPoints { t_g, t_l, t_0, roots }
}

/// Newton refinement that only accepts steps reducing `|f|`.
fn polish(mut x: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> f64 {
    let mut fx = f(x);
    for _ in 0..4 {
        let slope = df(x);
        if slope == 0.0 || fx == 0.0 {
            break;
        }
        let next = x - fx / slope;
        let fn_ = f(next);
        if fn_.abs() < fx.abs() {
            x = next;
            fx = fn_;
        } else {
            break;
        }
    }
    x
}

/// Distinct positive real roots of `g`, ascending.
pub fn positive_roots(q: &QuarticCoeffs) -> Vec<f64> {
    let coeffs = q.as_array();
    let bound = 2.0 * poly::cauchy_bound(&coeffs);
    let mut breaks = vec![0.0];
    breaks.extend(
        derivative_critical_points(q)
            .roots
            .into_iter()
            .filter(|&t| t > 0.0 && t < bound),
    );
    breaks.push(bound);
    breaks.dedup();

    let mut roots: Vec<f64> = Vec::new();
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let (glo, ghi) = (q.eval(lo), q.eval(hi));
        if glo == 0.0 && lo > 0.0 {
            roots.push(lo);
        }
        if (glo < 0.0 && ghi > 0.0) || (glo > 0.0 && ghi < 0.0) {
            roots.push(poly::bisect(|n| q.eval(n), lo, hi, ROOT_REL_TOL));
        }
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
    roots
}

/// An interval of blocklengths with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Interval {
    pub fn closed(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_open: false,
            upper_open: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_open { x > self.lower } else { x >= self.lower };
        let below = if self.upper_open { x < self.upper } else { x <= self.upper };
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lower, lower_open) = match self.lower.total_cmp(&other.lower) {
            std::cmp::Ordering::Greater => (self.lower, self.lower_open),
            std::cmp::Ordering::Less => (other.lower, other.lower_open),
            std::cmp::Ordering::Equal => (self.lower, self.lower_open || other.lower_open),
        };
        let (upper, upper_open) = match self.upper.total_cmp(&other.upper) {
            std::cmp::Ordering::Less => (self.upper, self.upper_open),
            std::cmp::Ordering::Greater => (other.upper, other.upper_open),
            std::cmp::Ordering::Equal => (self.upper, self.upper_open || other.upper_open),
        };
        let nonempty = lower < upper || (lower == upper && !lower_open && !upper_open);
        nonempty.then_some(Interval {
            lower,
            upper,
            lower_open,
            upper_open,
        })
    }

    /// Integers inside the interval, as an inclusive range (possibly empty).
    pub fn integers(&self) -> std::ops::RangeInclusive<u32> {
        let first = if self.lower_open {
            self.lower.floor() + 1.0
        } else {
            self.lower.ceil()
        };
        let last = if self.upper_open {
            self.upper.ceil() - 1.0
        } else {
            self.upper.floor()
        };
        let first = first.max(1.0);
        let last = last.min(u32::MAX as f64);
        if first > last {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        (first as u32)..=(last as u32)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_open { '(' } else { '[' },
            self.lower,
            self.upper,
            if self.upper_open { ')' } else { ']' }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmptyReason {
    /// `μ₀ ≤ 0`: the mean secrecy rate never exceeds any positive coding rate.
    NonPositiveMeanRate,
    /// No blocklength in `[1, N_G]` meets the outage threshold.
    ConstraintUnsatisfiable,
    /// `ζ ≤ 2^-K`: the outage floor at infinite blocklength is above `ζ`.
    ThresholdBelowFloor,
}

impl fmt::Display for EmptyReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmptyReason::NonPositiveMeanRate => write!(f, "mean secrecy rate is not positive (mu0 <= 0)"),
            EmptyReason::ConstraintUnsatisfiable => {
                write!(f, "outage constraint cannot be met within the blocklength cap")
            }
            EmptyReason::ThresholdBelowFloor => write!(f, "outage threshold below 2^-K"),
        }
    }
}

/// Disjoint, sorted union of blocklength intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub intervals: Vec<Interval>,
    pub empty_reason: Option<EmptyReason>,
    /// `N_L`, when the mean-rate condition applies.
    pub lower_limit: Option<f64>,
}

impl FeasibleSet {
    pub fn from_intervals(intervals: Vec<Interval>, lower_limit: Option<f64>) -> Self {
        let empty_reason = intervals
            .iter()
            .all(|iv| iv.integers().is_empty())
            .then_some(EmptyReason::ConstraintUnsatisfiable);
        FeasibleSet {
            intervals,
            empty_reason,
            lower_limit,
        }
    }

    pub fn empty(reason: EmptyReason) -> Self {
        FeasibleSet {
            intervals: Vec::new(),
            empty_reason: Some(reason),
            lower_limit: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty_reason.is_some()
    }

    pub fn contains(&self, n: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(n))
    }

    /// Every integer blocklength in the set, ascending.
    pub fn integers(&self) -> impl Iterator<Item = u32> + '_ {
        self.intervals.iter().flat_map(|iv| iv.integers())
    }
}

/// `n`-domain piece of `{g ≥ 0}` converted to blocklengths.
fn to_blocklengths(lo_n: f64, hi_n: f64) -> Interval {
    Interval::closed(
        1.0 / (hi_n * hi_n),
        if lo_n > 0.0 { 1.0 / (lo_n * lo_n) } else { f64::INFINITY },
    )
}

/// `{n > 0 : g(n) ≥ 0}` as closed `n`-intervals (upper end may be `∞`).
pub fn nonnegative_pieces(q: &QuarticCoeffs) -> Vec<(f64, f64)> {
    let roots = positive_roots(q);
    let mut pts = vec![0.0];
    pts.extend(&roots);
    pts.push(f64::INFINITY);

    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for pair in pts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mid = if hi.is_infinite() { 2.0 * lo + 1.0 } else { 0.5 * (lo + hi) };
        if q.eval(mid) >= 0.0 {
            match pieces.last_mut() {
                Some(last) if last.1 == lo => last.1 = hi,
                _ => pieces.push((lo, hi)),
            }
        }
    }
    // A dip that stays within evaluation roundoff is a tangency, not a gap.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
    for (lo, hi) in pieces {
        match merged.last_mut() {
            Some(last) if within_roundoff(q, 0.5 * (last.1 + lo)) => last.1 = hi,
            _ => merged.push((lo, hi)),
        }
    }
    merged.retain(|&(lo, hi)| hi - lo >= MIN_WIDTH_N);
    merged
}

/// Whether `g(n)` is indistinguishable from zero given Horner rounding error.
fn within_roundoff(q: &QuarticCoeffs, n: f64) -> bool {
    let scale = poly::eval(&q.as_array().map(f64::abs), n.abs());
    q.eval(n).abs() <= 16.0 * f64::EPSILON * scale
}

/// `n̂ = (√(μ₁² + 4Bμ₀) − μ₁)/(2B)`, written without cancellation.
fn mean_rate_root(bits: f64, mu: &MuCoefficients) -> f64 {
    2.0 * mu.mu0 / ((mu.mu1 * mu.mu1 + 4.0 * bits * mu.mu0).sqrt() + mu.mu1)
}

/// `N_L = 4B² / (√(μ₁² + 4Bμ₀) − μ₁)²`; requires `μ₀ > 0`.
pub fn mean_rate_threshold(bits: f64, mu: &MuCoefficients) -> f64 {
    let n_hat = mean_rate_root(bits, mu);
    1.0 / (n_hat * n_hat)
}

fn assemble(cfg: &SystemConfig, mu: &MuCoefficients, omega: Vec<Interval>) -> FeasibleSet {
    let bits = cfg.payload_bits as f64;
    let n_l = mean_rate_threshold(bits, mu);
    let window = Interval {
        lower: n_l,
        upper: f64::INFINITY,
        lower_open: true,
        upper_open: true,
    }
    .intersect(&Interval::closed(1.0, cfg.max_blocklength as f64));
    let mut intervals: Vec<Interval> = match window {
        Some(w) => omega.iter().filter_map(|iv| iv.intersect(&w)).collect(),
        None => Vec::new(),
    };
    intervals.sort_by(|x, y| x.lower.total_cmp(&y.lower));
    FeasibleSet::from_intervals(intervals, Some(n_l))
}

/// Blocklengths in `[1, N_G]` whose Gaussian-fit outage does not exceed `ζ`.
///
/// Without an outage threshold every blocklength in `[1, N_G]` is feasible.
pub fn feasible_blocklengths(cfg: &SystemConfig, mu: &MuCoefficients) -> Result<FeasibleSet> {
    let Some(zeta) = cfg.zeta else {
        return Ok(FeasibleSet::from_intervals(
            vec![Interval::closed(1.0, cfg.max_blocklength as f64)],
            None,
        ));
    };
    if mu.mu0 <= 0.0 {
        return Ok(FeasibleSet::empty(EmptyReason::NonPositiveMeanRate));
    }
    let q = quartic_coefficients_for(cfg.payload_bits as f64, zeta, mu)?;
    let omega = nonnegative_pieces(&q)
        .into_iter()
        .map(|(lo, hi)| to_blocklengths(lo, hi))
        .collect();
    Ok(assemble(cfg, mu, omega))
}

/// Shape classes of `g` on `n > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Increasing.
    Increasing,
    /// Decreasing, then increasing.
    Valley,
    /// Increasing, decreasing, then increasing.
    PeakValley,
}

pub fn classify(q: &QuarticCoeffs) -> Shape {
    let cp = derivative_critical_points(q);
    if q.c >= 0.0 && q.d >= 0.0 {
        return Shape::Increasing;
    }
    if let Some(t0) = cp.t_0 {
        if q.eval_derivative(t0) >= 0.0 {
            return Shape::Increasing;
        }
    }
    if (q.c >= 0.0 && q.d < 0.0) || (q.c < 0.0 && q.d <= 0.0) {
        Shape::Valley
    } else {
        Shape::PeakValley
    }
}

/// `N_Ω` in the `n` domain from the case analysis, using positive roots from
/// an independent complex root finder. `None` when the conditions fall in a
/// combination the case analysis leaves unspecified.
pub fn omega_by_cases(q: &QuarticCoeffs) -> Option<Vec<(f64, f64)>> {
    let cp = derivative_critical_points(q);
    let e = q.e;
    let roots = aberth_positive_roots(q);
    let m = roots.len();
    let top = |k: usize| (m > k).then(|| roots[m - 1 - k]);
    let inf = f64::INFINITY;

    let everything = Some(vec![(0.0, inf)]);
    let beyond_largest = || top(0).map(|nm| vec![(nm, inf)]);
    let two_pieces = || Some(vec![(0.0, top(1)?), (top(0)?, inf)]);
    let three_pieces = || Some(vec![(top(2)?, top(1)?), (top(0)?, inf)]);

    match classify(q) {
        Shape::Increasing => {
            if e >= 0.0 {
                everything
            } else {
                beyond_largest()
            }
        }
        Shape::Valley => {
            let g_tg = q.eval(cp.t_g);
            if g_tg >= 0.0 {
                everything
            } else if e <= 0.0 {
                beyond_largest()
            } else {
                two_pieces()
            }
        }
        Shape::PeakValley => {
            let g_tg = q.eval(cp.t_g);
            let g_tl = q.eval(cp.t_l?);
            if e >= 0.0 && g_tg >= 0.0 {
                everything
            } else if (g_tl <= 0.0 || e < 0.0) && g_tg >= 0.0 {
                beyond_largest()
            } else if e >= 0.0 && g_tg < 0.0 {
                two_pieces()
            } else if g_tl > 0.0 && e < 0.0 && g_tg < 0.0 {
                three_pieces()
            } else {
                None
            }
        }
    }
}

fn aberth_positive_roots(q: &QuarticCoeffs) -> Vec<f64> {
    let coeffs = q.as_array();
    let mut out: Vec<f64> = poly::complex_roots(&coeffs)
        .into_iter()
        .filter(|z| z.re > 0.0 && z.im.abs() <= 1e-7 * (1.0 + z.norm()))
        .map(|z| {
            polish(z.re, |x| q.eval(x), |x| q.eval_derivative(x))
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs());
    out
}

/// Cross-check path: same contract as [`feasible_blocklengths`], built from
/// the case analysis. `None` when the case is unspecified.
pub fn feasible_blocklengths_by_cases(cfg: &SystemConfig, mu: &MuCoefficients) -> Result<Option<FeasibleSet>> {
    let Some(zeta) = cfg.zeta else {
        return feasible_blocklengths(cfg, mu).map(Some);
    };
    if mu.mu0 <= 0.0 {
        return Ok(Some(FeasibleSet::empty(EmptyReason::NonPositiveMeanRate)));
    }
    let q = quartic_coefficients_for(cfg.payload_bits as f64, zeta, mu)?;
    Ok(omega_by_cases(&q).map(|pieces| {
        let omega = pieces
            .into_iter()
            .filter(|&(lo, hi)| hi - lo >= MIN_WIDTH_N)
            .map(|(lo, hi)| to_blocklengths(lo, hi))
            .collect();
        assemble(cfg, mu, omega)
    }))
}
