use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polynomial degree {degree}: {reason}")]
    InvalidDegree { degree: usize, reason: &'static str },

    #[error("Newton iteration for root {root} did not converge after {iterations} iterations")]
    NoConvergence { root: usize, iterations: usize },

    #[error("multiplication coefficient has degree {degree}, at most 2 is supported")]
    UnsupportedCoefficient { degree: usize },

    #[error("operator requires a = 1 - x^2, got monomial coefficients {coefficients:?}")]
    NotLegendreWeight { coefficients: Vec<f64> },

    #[error("flux {flux} cannot be used with {problem}")]
    InvalidPairing { flux: &'static str, problem: &'static str },

    #[error("field shape ({rows}x{cols}) does not match p = {p}, N = {elements}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        p: usize,
        elements: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution became non-finite")]
    NonFinite,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
