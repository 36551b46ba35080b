use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid dimension d = {d}: {reason}")]
    InvalidDimension { d: usize, reason: &'static str },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("ensemble term {index} is not unitary (residual {residual:.3e})")]
    NotUnitary { index: usize, residual: f64 },

    #[error("empty operator list")]
    Empty,

    #[error("channel is not doubly stochastic (cp {cp:.3e}, tp {tp:.3e}, unital {unital:.3e}; tolerance {tol:.3e})")]
    NotDoublyStochastic { cp: f64, tp: f64, unital: f64, tol: f64 },

    #[error("design '{name}' failed strength-{strength} verification (error {error:.3e} > {tol:.3e})")]
    DesignVerification { name: String, strength: u8, error: f64, tol: f64 },

    #[error("p = {p} is outside [0, 1/(d^2-1)] = [0, {bound}] where the decomposition is guaranteed")]
    MixingOutOfRange { p: f64, bound: f64 },

    #[error("channel is outside the certified ball (distance {distance:.6e} > radius {radius:.6e})")]
    OutsideBall { distance: f64, radius: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("group closure exceeded {cap} elements")]
    ClosureOverflow { cap: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("pruning failed: {0}")]
    Pruning(String),

    #[error("malformed channel file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_mismatch(expected: (usize, usize), found: (usize, usize)) -> Error {
    Error::DimensionMismatch {
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}
