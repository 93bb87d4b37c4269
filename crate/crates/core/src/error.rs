use thiserror::Error;

/// Errors raised by the numerical kernels and the pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series for 1F1({a}, {b}; {z}) did not converge within {terms} terms")]
    NonConvergence {
        a: f64,
        b: f64,
        z: f64,
        terms: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Wronskian vanishes at x = {x}")]
    Singularity { x: f64 },

    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    #[error("energy {energy} coincides with a factorization energy")]
    Degenerate { energy: f64 },

    #[error("function is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("potential is singular at grid point x = {x} (|V| = {value:e})")]
    PotentialSingularity { x: f64, value: f64 },

    #[error("factorization energy {0} lies on an interval endpoint")]
    BoundaryValue(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
