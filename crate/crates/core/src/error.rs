use thiserror::Error;

/// Failures of the decoupling pipelines and their inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range (must be < {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not a symplex (residual {residual:.3e})")]
    NotASymplex { residual: f64 },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("matrix has a complex eigenvalue quadruple (K2 = {k2:.6e})")]
    ComplexEigenvalues { k2: f64 },

    #[error("auxiliary vector b and all mass components vanish but the matrix is coupled")]
    DegenerateB,

    #[error("branch precondition violated: {reason}")]
    BranchMismatch { reason: String },

    #[error("boost at step {step} requires |{argument:.6e}| < 1")]
    BoostDomain { step: usize, argument: f64 },

    #[error("off-pattern residual {residual:.3e} exceeds tolerance")]
    PrecisionLoss { residual: f64 },

    #[error("block {block} has a real eigenvalue pair and cannot be scaled to a rotation")]
    UnstableBlock { block: usize },

    #[error("operation requires {expected} form, found {found}")]
    WrongForm {
        expected: &'static str,
        found: &'static str,
    },

    #[error("Jacobi iteration did not converge within {steps} steps (residual {residual:.3e})")]
    MaxStepsExceeded { steps: usize, residual: f64 },

    #[error("pivot ({i}, {j}) has complex eigenvalues (K2 = {k2:.6e})")]
    PivotComplex { i: usize, j: usize, k2: f64 },

    #[error("system is unstable: {reason}")]
    UnstableSystem { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
