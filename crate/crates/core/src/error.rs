use thiserror::Error;

/// Coarse classification of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input: bad parameters, grids or quantum numbers.
    Input,
    /// The physics has no answer for this input (supercritical, not bound, ...).
    Domain,
    /// A numerical procedure failed to produce a trustworthy result.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KgError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid quantum numbers (n={n}, l={l}, m={m}): need n >= 1, 0 <= l <= n-1, |m| <= l")]
    InvalidQuantumNumbers { n: i64, l: i64, m: i64 },

    #[error("supercritical coupling: Z*alpha = {z_alpha} >= l + 1/2 = {limit} (l = {l})")]
    SupercriticalCoupling { z_alpha: f64, l: u32, limit: f64 },

    #[error("state is not bound: E' = {e_prime} >= 0")]
    NotBound { e_prime: f64 },

    #[error("gamma function pole at x = {x}")]
    PoleError { x: f64 },

    #[error("degenerate recurrence denominator at s={s}, nu={nu}, l={l}, Z*alpha={z_alpha}")]
    DegenerateRecurrence { s: f64, nu: u32, l: u32, z_alpha: f64 },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("radial samples have not decayed at r_max (tail/peak = {ratio:e}); increase r_max")]
    TailNotConverged { ratio: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("no bound state with {node_target} nodes on this grid")]
    StateNotFound { node_target: usize },

    #[error("self-consistency did not converge after {iterations} iterations (last m = {last}, previous m = {previous})")]
    NoConvergence { iterations: usize, last: f64, previous: f64 },

    #[error("boost speed |v| = {v} is not below c = {c}")]
    SuperluminalBoost { v: f64, c: f64 },
}

impl KgError {
    pub fn class(&self) -> ErrorClass {
        match self {
            KgError::InvalidParams(_)
            | KgError::InvalidQuantumNumbers { .. }
            | KgError::InvalidGrid(_)
            | KgError::UnsupportedCombination(_) => ErrorClass::Input,
            KgError::SupercriticalCoupling { .. }
            | KgError::NotBound { .. }
            | KgError::PoleError { .. }
            | KgError::SuperluminalBoost { .. }
            | KgError::StateNotFound { .. } => ErrorClass::Domain,
            KgError::DegenerateRecurrence { .. }
            | KgError::QuadratureFailure(_)
            | KgError::TailNotConverged { .. }
            | KgError::NoConvergence { .. } => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, KgError>;
