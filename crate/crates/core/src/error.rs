use thiserror::Error;

use crate::geometry::Matching;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("general position violated: {0}")]
    GeneralPositionViolation(String),

    #[error("point index {index} out of range for instance of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("instance of size {n} exceeds the limit of {max} points for this solver")]
    InstanceTooLarge { n: usize, max: usize },

    /// The search budget ran out. `best` is the incumbent, which may not be optimal.
    #[error("search budget exceeded after {nodes} nodes (incumbent covers {} points)", best.matched_count())]
    BudgetExceeded { best: Matching, nodes: u64 },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("matrix is not stochastic: {0}")]
    NotStochastic(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("transition structure is not irreducible")]
    NotIrreducible,

    #[error("transition structure is periodic with period {period}")]
    Periodic { period: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("convergence index not reached within cap {cap}")]
    CapExceeded { cap: usize },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("bounded-difference profile is empty")]
    EmptyProfile,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for the errors that stem from chain validation.
    pub fn is_chain_validation(&self) -> bool {
        matches!(
            self,
            Error::MalformedMatrix(_)
                | Error::NotStochastic(_)
                | Error::InvalidDistribution(_)
                | Error::NotIrreducible
                | Error::Periodic { .. }
                | Error::NoConvergence { .. }
                | Error::CapExceeded { .. }
        )
    }
}
