use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("point is not on the surface (distance {distance:e})")]
    NotOnSurface { distance: f64 },
    #[error("closest-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("rejection sampling exceeded {0} proposals")]
    RejectionCap(u64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("sites {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("path leaves the unit square at t = {0}")]
    CurveEscapes(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("truncation too tight: tail mass {tail:e} exceeds 1% of {integral:e}")]
    TruncationTooTight { tail: f64, integral: f64 },
    #[error("degenerate variance at level {0}")]
    DegenerateVariance(f64),
    #[error("too many failed replicates: {failed} of {total}")]
    ReplicateFailures { failed: usize, total: usize },
    #[error("unknown {kind} '{name}'; available: {available}")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::Dimension { .. }
                | Error::UnknownName { .. }
                | Error::Unsupported(_)
                | Error::HypothesisViolation(_)
                | Error::Json(_)
        )
    }
}
