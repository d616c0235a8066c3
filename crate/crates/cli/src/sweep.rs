//! One-parameter sweeps of the optimal blocklength.

use anyhow::{bail, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wiretap_fbl::moments::MomentCache;

use crate::optimize::{solve, Method, Sampling};
use crate::output::{fmt_f64, Csv, OutputDir};
use crate::scenario::{Scenario, ZetaArg};
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Vary {
    #[value(name = "gamma-db")]
    #[serde(rename = "gamma-db")]
    GammaDb,
    #[value(name = "B")]
    #[serde(rename = "B")]
    Bits,
    #[value(name = "K")]
    #[serde(rename = "K")]
    Antennas,
    #[value(name = "zeta")]
    #[serde(rename = "zeta")]
    Zeta,
    #[value(name = "eps")]
    #[serde(rename = "eps")]
    Eps,
    #[value(name = "delta")]
    #[serde(rename = "delta")]
    Delta,
}

impl Vary {
    fn column(self) -> &'static str {
        match self {
            Vary::GammaDb => "gamma_db",
            Vary::Bits => "B",
            Vary::Antennas => "K",
            Vary::Zeta => "zeta",
            Vary::Eps => "eps",
            Vary::Delta => "delta",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Vary::Bits | Vary::Antennas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub vary: Vary,
    pub from: f64,
    pub to: f64,
    pub steps: u32,
    pub method: Method,
    pub scenario: Scenario,
    pub sampling: Option<Sampling>,
}

impl SweepParams {
    /// Evenly spaced values from `from` to `to`; a single step gives `from`.
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let v = self.from + (self.to - self.from) * i as f64 / last;
                if self.vary.integral() {
                    v.round()
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            bail!(UsageError("--from and --to must be finite".into()));
        }
        if self.vary.integral() {
            for v in [self.from, self.to] {
                if v < 1.0 || v > u32::MAX as f64 || v.fract() != 0.0 {
                    bail!(UsageError(format!(
                        "--vary {} takes positive integers, got {v}",
                        self.vary.column()
                    )));
                }
            }
        }
        Ok(())
    }

    fn scenario_at(&self, v: f64) -> Scenario {
        let mut s = self.scenario.clone();
        match self.vary {
            Vary::GammaDb => s.gamma_db = v,
            Vary::Bits => s.bits = v as u32,
            Vary::Antennas => s.antennas = v as u32,
            Vary::Zeta => s.zeta = ZetaArg::Value(v),
            Vary::Eps => s.eps = v,
            Vary::Delta => s.delta = v,
        }
        s
    }

    fn value_field(&self, v: f64) -> String {
        if self.vary.integral() {
            (v as u32).to_string()
        } else {
            fmt_f64(v)
        }
    }
}

pub const SWEEP_NAME: &str = "sweep.csv";

pub fn execute(p: &SweepParams, out: &mut OutputDir) -> Result<()> {
    p.check()?;
    let cache = MomentCache::new();
    let values = p.values();
    // Collecting an indexed parallel iterator keeps rows in sweep order.
    let reports = values
        .par_iter()
        .map(|&v| solve(&p.scenario_at(v), p.method, p.sampling.as_ref(), &cache))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = Csv::new(&[p.vary.column(), "N_opt", "T_opt", "p_out_at_opt"]);
    for (&v, report) in values.iter().zip(&reports) {
        let [n, t, p_out] = report.csv_fields();
        csv.row(&[p.value_field(v), n, t, p_out]);
    }
    out.write(SWEEP_NAME, &csv.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(vary: Vary, from: f64, to: f64, steps: u32) -> SweepParams {
        SweepParams {
            vary,
            from,
            to,
            steps,
            method: Method::HighSnr,
            scenario: Scenario::default(),
            sampling: None,
        }
    }

    #[test]
    fn grid_endpoints_and_rounding() {
        assert_eq!(params(Vary::GammaDb, 5.0, 20.0, 16).values()[15], 20.0);
        assert_eq!(params(Vary::Antennas, 2.0, 16.0, 15).values(), (2..=16).map(f64::from).collect::<Vec<_>>());
        assert_eq!(params(Vary::Bits, 100.0, 800.0, 1).values(), vec![100.0]);
    }

    #[test]
    fn integral_parameters_reject_fractions() {
        assert!(params(Vary::Antennas, 2.5, 16.0, 3).check().is_err());
        assert!(params(Vary::Bits, 0.0, 16.0, 3).check().is_err());
        assert!(params(Vary::Eps, 1e-5, 1e-1, 3).check().is_ok());
    }
}
