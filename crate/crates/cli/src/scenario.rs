//! Scenario resolution: paper defaults, then a JSON scenario file, then flags.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use wiretap_fbl::{Probability, SystemConfig};

/// Outage threshold as given on the command line: a probability or `none`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZetaArg {
    Value(f64),
    Unconstrained,
}

impl Serialize for ZetaArg {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ZetaArg::Value(z) => s.serialize_f64(*z),
            ZetaArg::Unconstrained => s.serialize_str("none"),
        }
    }
}

// Goes through `Value` rather than an untagged enum: buffered numbers do not
// survive untagged matching when serde_json keeps arbitrary precision.
impl<'de> Deserialize<'de> for ZetaArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(ZetaArg::Value)
                .ok_or_else(|| serde::de::Error::custom("zeta out of range")),
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "expected a number or \"none\" for zeta, got {other}"
            ))),
        }
    }
}

impl FromStr for ZetaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(ZetaArg::Unconstrained);
        }
        s.parse::<f64>()
            .map(ZetaArg::Value)
            .map_err(|_| format!("expected a probability or \"none\", got {s:?}"))
    }
}

impl ZetaArg {
    pub fn value(self) -> Option<f64> {
        match self {
            ZetaArg::Value(z) => Some(z),
            ZetaArg::Unconstrained => None,
        }
    }
}

/// Scenario flags shared by every command except the SNR, which each
/// command declares itself.
#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioArgs {
    /// JSON scenario file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Transmit antennas K.
    #[arg(long, short = 'K')]
    pub antennas: Option<u32>,
    /// Decoding error constraint.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Information leakage constraint.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Outage threshold, or "none" for no outage constraint.
    #[arg(long)]
    pub zeta: Option<ZetaArg>,
    /// Confidential bits per packet B.
    #[arg(long, short = 'B')]
    pub bits: Option<u32>,
    /// Largest blocklength N_G.
    #[arg(long)]
    pub max_blocklength: Option<u32>,
}

/// Fully resolved scenario in command-line units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub antennas: u32,
    pub gamma_db: f64,
    pub eps: f64,
    pub delta: f64,
    pub zeta: ZetaArg,
    pub bits: u32,
    pub max_blocklength: u32,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            antennas: 8,
            gamma_db: 10.0,
            eps: 1e-3,
            delta: 1e-3,
            zeta: ZetaArg::Value(0.2),
            bits: 400,
            max_blocklength: 1000,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioFile {
    antennas: Option<u32>,
    gamma_db: Option<f64>,
    eps: Option<f64>,
    delta: Option<f64>,
    zeta: Option<ZetaArg>,
    bits: Option<u32>,
    max_blocklength: Option<u32>,
}

impl Scenario {
    pub fn resolve(args: &ScenarioArgs, gamma_db: Option<f64>) -> Result<Self> {
        let mut s = Scenario::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let f: ScenarioFile =
                serde_json::from_str(&text).with_context(|| format!("parsing scenario file {}", path.display()))?;
            s.apply(f.antennas, f.gamma_db, f.eps, f.delta, f.zeta, f.bits, f.max_blocklength);
        }
        s.apply(
            args.antennas,
            gamma_db,
            args.eps,
            args.delta,
            args.zeta,
            args.bits,
            args.max_blocklength,
        );
        Ok(s)
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(
        &mut self,
        antennas: Option<u32>,
        gamma_db: Option<f64>,
        eps: Option<f64>,
        delta: Option<f64>,
        zeta: Option<ZetaArg>,
        bits: Option<u32>,
        max_blocklength: Option<u32>,
    ) {
        self.antennas = antennas.unwrap_or(self.antennas);
        self.gamma_db = gamma_db.unwrap_or(self.gamma_db);
        self.eps = eps.unwrap_or(self.eps);
        self.delta = delta.unwrap_or(self.delta);
        self.zeta = zeta.unwrap_or(self.zeta);
        self.bits = bits.unwrap_or(self.bits);
        self.max_blocklength = max_blocklength.unwrap_or(self.max_blocklength);
    }

    /// Validated library configuration.
    pub fn to_config(&self) -> wiretap_fbl::Result<SystemConfig> {
        let cfg = SystemConfig {
            antennas: self.antennas,
            mean_snr: 0.0,
            eps_bar: Probability::new(self.eps)?,
            delta_bar: Probability::new(self.delta)?,
            zeta: self.zeta.value().map(Probability::new).transpose()?,
            payload_bits: self.bits,
            max_blocklength: self.max_blocklength,
        }
        .with_mean_snr_db(self.gamma_db);
        cfg.validate()?;
        Ok(cfg)
    }
}
