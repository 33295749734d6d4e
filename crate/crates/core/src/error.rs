use thiserror::Error;

/// Errors raised by environment construction, solvers and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid vertex id {0}")]
    InvalidVertex(u32),

    #[error("ball of radius {radius} covers the whole generated graph; horizon too short")]
    BallCoversGraph { radius: u32 },

    #[error("safe region too small: need radius {needed}, have {available}")]
    Horizon { needed: u64, available: u64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("insufficient cut-times: found {found}, need {needed}")]
    InsufficientCutTimes { found: usize, needed: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
