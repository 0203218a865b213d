use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index range error: {0}")]
    Range(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty region")]
    EmptyRegion,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },
    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("singular matrix B(W) at W = {0:?}")]
    Singular(Vec<f64>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LinearSolve { .. } | Error::BlowUp { .. } | Error::NonFinite(_) | Error::Singular(_)
        )
    }
}
