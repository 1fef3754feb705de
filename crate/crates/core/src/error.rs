use thiserror::Error;

use crate::params::Param;

/// Errors raised by model construction, eigensolvers and geometric-tensor evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("basis dimension {dim} exceeds configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("operator does not commute with parity: max |[M, P]| = {defect:e}")]
    ParityBreaking { defect: f64 },

    #[error("dimension {dim} exceeds the dense eigensolver limit {limit}; use the iterative path")]
    DenseLimit { dim: usize, limit: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolveNoConvergence { iterations: usize, residual: f64 },

    #[error("state {index} is degenerate (gap {gap:e}); the geometric tensor is undefined")]
    Degenerate { index: usize, gap: f64 },

    #[error("phase mismatch: {0}")]
    WrongPhase(String),

    #[error("matrix is not a quadratic bosonic form: {0}")]
    NotQuadratic(String),

    #[error("quadratic form is dynamically unstable")]
    Unstable,

    #[error("matrix is not Hermitian: max |Q - Q^dagger| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("parameter {0} is not part of this tensor")]
    MissingParam(Param),

    #[error("finite-difference stencil overlap {overlap:.3} below 0.5: step too large or level crossing detected")]
    StencilOverlap { overlap: f64 },

    #[error("Fock tail weight {tail:e} beyond cutoff exceeds tolerance; increase n_max")]
    FockTail { tail: f64 },

    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    #[error("maximum of the series lies at the grid edge; widen the grid")]
    PeakAtEdge,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
