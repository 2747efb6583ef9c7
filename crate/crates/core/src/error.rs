use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The local temperature diverges on the horizon.
    #[error("local temperature diverges at the horizon (d = 0)")]
    HorizonDivergence,

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("branch of the square root jumps along the contour near z = {re} {im:+}i")]
    BranchDiscontinuity { re: f64, im: f64 },

    #[error("epsilon extrapolation is unstable: successive differences {previous:e} -> {next:e}")]
    ExtrapolationUnstable { previous: f64, next: f64 },

    #[error("mutual information {value:e} is negative beyond its error budget {budget:e}")]
    NegativeMutualInformation { value: f64, budget: f64 },

    #[error("need at least {needed} grid points, got {got}")]
    InsufficientGrid { needed: usize, got: usize },

    #[error("sweep specification: {0}")]
    Spec(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
