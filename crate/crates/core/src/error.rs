use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("block sizes sum to {sum}, expected n = {n}")]
    PartsMismatch { n: usize, sum: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{m} blocks do not divide {n} qubits evenly")]
    NotDivisible { n: usize, m: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("schedule is singular at s = {s}: f = g = 0")]
    SingularSchedule { s: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} > tolerance {tolerance:e}")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("{n} qubits exceeds the dense limit of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("norm drift {drift:e} exceeds {limit:e}; raise ode_steps_per_unit_time")]
    NormDrift { drift: f64, limit: f64 },

    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGround { gap: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
