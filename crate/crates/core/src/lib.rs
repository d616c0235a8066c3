//! Outage probability, effective throughput and blocklength selection for
//! short-packet wiretap transmission over quasi-static Rayleigh fading.
//!
//! Two analytic routes are provided. The general route fits a Gaussian to
//! the achievable secrecy rate by matching moments computed with numerical
//! quadrature ([`moments`], [`approx`]), turns the outage constraint into an
//! explicit blocklength set ([`feasible`]) and scans it ([`optimizer`]). The
//! high-SNR route ([`highsnr`]) has closed forms for the outage, the
//! throughput and the optimal blocklength. [`montecarlo`] samples fading
//! realizations and serves as ground truth for both.

pub mod approx;
pub mod error;
pub mod feasible;
pub mod highsnr;
pub mod model;
pub mod moments;
pub mod montecarlo;
pub mod optimizer;
mod poly;
mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use model::SystemConfig;
pub use specfun::Probability;
