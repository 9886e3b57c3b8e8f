use thiserror::Error;

/// Errors raised by the kernel, the evaluators and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A matrix that has to be inverted (a constraint or noise covariance) is not
    /// positive definite above the configured floor.
    #[error("constraint matrix is not positive definite (min eigenvalue {min_eigenvalue:e} <= floor {floor:e})")]
    SingularConstraintMatrix { min_eigenvalue: f64, floor: f64 },
    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("iteration limit of {0} reached without convergence")]
    MaxItersExceeded(usize),
    #[error("SINR targets are infeasible (power exceeded {0:e})")]
    InfeasibleTargets(f64),
    #[error("degenerate transform: {0}")]
    DegenerateTransform(String),
    #[error("cutting-plane budget of {0} cuts exhausted")]
    MaxCutsExceeded(usize),
    #[error("grid of {points} points exceeds the budget of {budget}")]
    GridBudgetExceeded { points: u128, budget: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
