use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix or vector contains non-finite entries")]
    InvalidMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("metric operator is not symmetric positive definite (smallest eigenvalue {0:e})")]
    HNotPositiveDefinite(f64),

    #[error("inner prox solver stalled after {iterations} iterations (residual {residual:e})")]
    InnerSolverStalled { iterations: usize, residual: f64 },

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid majorant model: {0}")]
    InvalidModel(String),

    #[error("invalid local constants: {0}")]
    InvalidConstants(String),

    #[error("h-condition violated: h = {0} >= 1")]
    H3Violated(f64),

    #[error("radius cross-check mismatch: closed form {closed} vs bisection {generic}")]
    CrossCheckMismatch { closed: f64, generic: f64 },

    #[error("radius undefined: {0}")]
    RadiusUndefined(String),

    #[error("t = {t} lies outside (0, {nu})")]
    DomainError { t: f64, nu: f64 },

    #[error("Jacobian is not injective (smallest singular value {0:e})")]
    SingularJacobian(f64),

    #[error("iterate left the problem domain")]
    LeftDomain,

    #[error("problem has no ground-truth minimizer")]
    MissingGroundTruth,

    #[error("Jacobian at the minimizer is not injective (smallest singular value {0:e})")]
    NotInjectiveAtMinimizer(f64),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),
}
