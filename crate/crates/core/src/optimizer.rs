//! Blocklength selection for the general (Gaussian-fit) route: an integer
//! scan of the effective throughput over the feasible set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{effective_throughput, ThroughputPoint};
use crate::error::Result;
use crate::feasible::{feasible_blocklengths, FeasibleSet};
use crate::model::SystemConfig;
use crate::moments::{MomentSet, MuCoefficients, DEFAULT_TOL};
use crate::specfun::Probability;

/// Outcome of a blocklength search. `n_opt` is `None` when no blocklength
/// satisfies the constraints; `reason` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub n_opt: Option<u32>,
    pub throughput_opt: f64,
    pub outage_at_opt: Option<Probability>,
    pub feasible: FeasibleSet,
    pub evaluations: usize,
    pub reason: Option<String>,
    /// Free-form notes about edge conditions met during the search.
    pub diagnostics: Vec<String>,
}

impl OptimizationResult {
    pub fn found(best: ThroughputPoint, feasible: FeasibleSet, evaluations: usize) -> Self {
        OptimizationResult {
            n_opt: Some(best.blocklength),
            throughput_opt: best.throughput,
            outage_at_opt: Some(best.outage),
            feasible,
            evaluations,
            reason: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn absent(feasible: FeasibleSet, evaluations: usize, reason: impl Into<String>) -> Self {
        OptimizationResult {
            n_opt: None,
            throughput_opt: 0.0,
            outage_at_opt: None,
            feasible,
            evaluations,
            reason: Some(reason.into()),
            diagnostics: Vec::new(),
        }
    }
}

/// Largest throughput; among equal throughputs the smallest blocklength.
pub fn best_point<I: IntoIterator<Item = ThroughputPoint>>(points: I) -> Option<ThroughputPoint> {
    points.into_iter().fold(None, |best, p| match best {
        Some(b) if b.throughput > p.throughput => Some(b),
        Some(b) if b.throughput == p.throughput && b.blocklength <= p.blocklength => Some(b),
        _ => Some(p),
    })
}

/// Maximizes `(B/N)(1 − p_out)` over the feasible blocklengths.
pub fn optimize_blocklength_general(cfg: &SystemConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let mu = MomentSet::compute(cfg, DEFAULT_TOL)?.mu(cfg.eps_bar, cfg.delta_bar)?;
    optimize_with_moments(cfg, &mu)
}

/// As [`optimize_blocklength_general`] with precomputed fit coefficients.
pub fn optimize_with_moments(cfg: &SystemConfig, mu: &MuCoefficients) -> Result<OptimizationResult> {
    let feasible = feasible_blocklengths(cfg, mu)?;
    if let Some(reason) = feasible.empty_reason {
        return Ok(OptimizationResult::absent(feasible, 0, reason.to_string()));
    }
    let candidates: Vec<u32> = feasible.integers().collect();
    let points = candidates
        .par_iter()
        .map(|&n| effective_throughput(n, cfg, mu))
        .collect::<Result<Vec<_>>>()?;
    let best = best_point(points).expect("feasible set has an integer");
    Ok(OptimizationResult::found(best, feasible, candidates.len()))
}
