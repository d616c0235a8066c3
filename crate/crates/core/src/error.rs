use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario configuration breaks one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature did not converge: {what} (estimate {estimate:e}, error {error:e}, {panels} panels)")]
    Quadrature {
        what: String,
        estimate: f64,
        error: f64,
        panels: usize,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("no sign change of the stationarity function below N = {limit:e}")]
    NoSignChange { limit: f64 },
}
