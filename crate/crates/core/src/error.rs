use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A stationarity or moment condition required by the operation fails.
    #[error("condition `{name}` violated: lhs {lhs} is not below rhs {rhs}")]
    Condition { name: String, lhs: f64, rhs: f64 },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("simulation diverged at step {step} (sigma^2 = {value:e})")]
    Divergence { step: usize, value: f64 },

    #[error("no convergence after {iterations} iterations (last update {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("moment lookup failed: {0}")]
    Lookup(String),

    #[error("no Rosenthal constant known for p = {0}; supply an override")]
    MissingConstant(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
