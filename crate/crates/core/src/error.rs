use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInUpperHalfPlane { x: f64, y: f64 },

    #[error("point ({u}, {v}) is not in the open unit disk")]
    NotInUnitDisk { u: f64, v: f64 },

    #[error("point ({x}, {y}) is not in the fundamental domain")]
    NotInFundamentalDomain { x: f64, y: f64 },

    #[error("degenerate Moebius map: {0}")]
    DegenerateMap(String),

    #[error("point is mapped to infinity")]
    PoleHit,

    #[error("reduction did not terminate after {steps} steps")]
    ReductionDiverged { steps: usize },

    #[error("affine map is not invertible: |a| = {a_abs}, |b| = {b_abs}")]
    NotInvertible { a_abs: f64, b_abs: f64 },

    #[error("quadrature budget exhausted after {evaluations} evaluations (error estimate {error_estimate:e})")]
    BudgetExhausted {
        evaluations: usize,
        error_estimate: f64,
    },

    #[error("moment of order {order} diverges for {distribution}")]
    DivergentMoment {
        distribution: &'static str,
        order: u32,
    },

    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
