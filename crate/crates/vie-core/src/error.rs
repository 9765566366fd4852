use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("Newton iteration for Legendre-Gauss node {node} of degree {degree} did not converge")]
    RootFindingFailed { degree: usize, node: usize },

    #[error("invalid interval [{a}, {b}]: left endpoint must be strictly below right")]
    InvalidInterval { a: f64, b: f64 },

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(String),

    #[error("block index {index} out of range for {count} subintervals")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("singular local system: pivot {pivot:e} in column {column}")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("linear solver did not converge after {sweeps} sweeps (relative residual {residual:e})")]
    NoConvergence { sweeps: u32, residual: f64 },

    #[error("time {t} lies outside the solution domain [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },

    #[error("non-finite value in block {block} at iteration {iteration}")]
    Divergence { block: usize, iteration: usize },

    #[error("iteration stopped at increment {increment:e}, above the tolerance {tolerance:e}")]
    NotConverged { increment: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
