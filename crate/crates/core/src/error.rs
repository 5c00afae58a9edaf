use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0}: the field has no exact evaluator")]
    MissingEvaluator(&'static str),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("frequency must be positive, got {0}")]
    NonpositiveFrequency(f64),
    #[error("kernel evaluated on its diagonal")]
    DiagonalSingularity,
    #[error("evaluation point {index} is at distance {distance:.3e} from the support (minimum {delta:.3e})")]
    PointTooCloseToSupport {
        index: usize,
        distance: f64,
        delta: f64,
    },
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error("function vanishes on the grid")]
    ZeroFunction,
    #[error("search box contains no feasible parameters")]
    InfeasibleBox,
    #[error("support leaves the chart domain: {0}")]
    SupportEscape(String),
    #[error("chart verification failed: {0}")]
    ChartVerificationFailure(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
