use thiserror::Error;

/// Failures raised by the numerical routines.
///
/// Predicates such as sector checks never fail; they return verdicts. These
/// variants cover violated preconditions and breakdowns of a computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("form is not sectorial")]
    NotSectorial,

    #[error("form is not symmetric")]
    NotSymmetric,

    #[error("domain containment violated (residual {0:.3e})")]
    DomainNotContained(f64),

    #[error("relation does not split into an operator part and a multivalued part")]
    NotDecomposable,

    #[error("relation is not m-sectorial: {0}")]
    NotMSectorial(String),

    #[error("relation is not self-adjoint")]
    NotSelfAdjoint,

    #[error("relation is not the graph of an everywhere defined operator")]
    NotAnOperator,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("presentation is not j-elliptic (smallest eigenvalue {0:.3e})")]
    NotCoercive(f64),

    #[error("{0} lies outside the strip |Re z| < {1}")]
    OutsideStrip(String, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("limit form undetermined: {0}")]
    LimitUndetermined(String),

    #[error("hypothesis violated at n = {n}: {what}")]
    HypothesisViolated { n: usize, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
