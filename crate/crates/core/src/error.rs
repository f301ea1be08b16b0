use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetricInput { asymmetry: f64 },

    #[error("eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("rank deficient: smallest retained spectral value {smallest:e} <= floor {floor:e}")]
    RankDeficient { smallest: f64, floor: f64 },

    #[error("chain stepped onto the rank boundary after {attempts} attempt(s)")]
    BoundaryHit { attempts: u32 },

    #[error("chain aborted at iteration {iteration}: {cause}")]
    ChainAborted { iteration: u64, cause: Box<Error> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown metric `{0}`")]
    InvalidMetric(String),

    #[error("energy `{0}` cannot be evaluated on a dense matrix")]
    DenseUnsupported(&'static str),

    #[error("unsupported rank {0} for quadrature (supported: 1..=3)")]
    UnsupportedRank(usize),

    #[error("quadrature did not converge: drift {drift:e} at resolution {resolution}")]
    QuadratureUnconverged { drift: f64, resolution: usize },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("CDF grids do not match")]
    GridMismatch,

    #[error("need at least {needed} points with strictly increasing m, got {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("exponent {exponent} overflows f64")]
    Overflow { exponent: f64 },

    #[error("domain error: {0}")]
    DomainError(String),
}

impl Error {
    pub(crate) fn dims(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            found: found.into(),
        }
    }
}
