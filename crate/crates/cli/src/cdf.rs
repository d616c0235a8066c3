//! Empirical and approximate CDFs of the achievable secrecy rate.

use anyhow::Result;
use serde::{Deserialize, Serialize};
use wiretap_fbl::approx::approx_cdf;
use wiretap_fbl::highsnr::{highsnr_cdf, HighSnrParams};
use wiretap_fbl::moments::{fit_at_blocklength, MomentSet, DEFAULT_TOL};
use wiretap_fbl::montecarlo::RateSamples;

use crate::optimize::Sampling;
use crate::output::{fmt_f64, Csv, OutputDir};
use crate::scenario::Scenario;

pub const GRID_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfParams {
    /// One curve per entry; replaces `scenario.gamma_db`.
    pub gamma_db: Vec<f64>,
    pub blocklength: u32,
    pub high_snr: bool,
    pub scenario: Scenario,
    pub sampling: Sampling,
}

pub fn file_name(gamma_db: f64) -> String {
    format!("cdf_{gamma_db}dB.csv")
}

pub fn execute(p: &CdfParams, out: &mut OutputDir) -> Result<()> {
    let n = p.blocklength as f64;
    for &db in &p.gamma_db {
        let scenario = Scenario {
            gamma_db: db,
            ..p.scenario.clone()
        };
        let cfg = scenario.to_config()?;
        let fit = fit_at_blocklength(&MomentSet::compute(&cfg, DEFAULT_TOL)?.mu(cfg.eps_bar, cfg.delta_bar)?, n)?;
        let hp = if p.high_snr { Some(HighSnrParams::from_config(&cfg)?) } else { None };
        let empirical = RateSamples::draw(&p.sampling.spec(cfg))?.rate_cdf(n);

        let lo = empirical.quantile(0.001);
        let hi = empirical.quantile(0.999);
        let mut header = vec!["r", "empirical_cdf", "approx_cdf"];
        if hp.is_some() {
            header.push("highsnr_cdf");
        }
        let mut csv = Csv::new(&header);
        for i in 0..GRID_POINTS {
            let r = lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64;
            let mut row = vec![
                fmt_f64(r),
                fmt_f64(empirical.query(r).value()),
                fmt_f64(approx_cdf(r, &fit).value()),
            ];
            if let Some(hp) = &hp {
                row.push(fmt_f64(highsnr_cdf(r, n, hp).value()));
            }
            csv.row(&row);
        }
        out.write(&file_name(db), &csv.into_bytes())?;
    }
    Ok(())
}
