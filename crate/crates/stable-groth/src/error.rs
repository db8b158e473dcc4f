use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("skew shape {outer}/{inner} is not defined: inner shape not contained")]
    NotContained { outer: String, inner: String },
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("evaluation points must be pairwise distinct and nonzero")]
    DegeneratePoints,
    #[error("pole: 1 - a*x vanishes")]
    Pole,
    #[error("tail not converged: bound {bound:e} above tolerance {tol:e}")]
    TailNotConverged { bound: f64, tol: f64 },
    #[error("contour violation: {0}")]
    ContourViolation(String),
    #[error("quadrature not converged: error estimate {estimate:e} above tolerance {tol:e}")]
    QuadratureNotConverged { estimate: f64, tol: f64 },
    #[error("truncation failed: tail mass {tail:e} above tolerance {tol:e}")]
    TruncationFailed { tail: f64, tol: f64 },
    #[error("support exhausted after {0} retries")]
    SupportExhausted(usize),
    #[error("window overflow: need width {need}, have {have}")]
    WindowOverflow { need: usize, have: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of a numerical procedure to reach its tolerance,
    /// as opposed to rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TailNotConverged { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::TruncationFailed { .. }
                | Error::SupportExhausted(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
