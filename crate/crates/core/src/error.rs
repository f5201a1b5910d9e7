use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("cutoff too small: {0}")]
    InsufficientCutoff(String),

    #[error("spectrum too short: {0}")]
    InsufficientSpectrum(String),

    #[error("cannot merge spectra: {0}")]
    InvalidMerge(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain mask is empty")]
    EmptyDomain,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no convergence after {iterations} iterations (best residuals {residuals:?})")]
    Convergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
