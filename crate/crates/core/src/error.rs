use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rho = {0} is outside the open interval (-pi/2, pi/2)")]
    Domain(f64),

    #[error("non-finite integrand at {at} (segment {segment})")]
    NonFinite { at: Complex64, segment: usize },

    #[error("path {index}: {source}")]
    InPath {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid path: {0}")]
    InvalidPath(&'static str),

    #[error("z = {0} lies on a lattice point")]
    Pole(Complex64),

    #[error("could not pair cubic roots with half-period values (best mismatch {0:e})")]
    RootLabeling(f64),

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("inconsistent {what}: {first} vs {second}")]
    Inconsistent {
        what: &'static str,
        first: f64,
        second: f64,
    },

    #[error("green assembly: {0}")]
    Assembly(String),

    #[error("theta calibration failed: {0}")]
    Calibration(String),

    #[error("invalid theta parameters: {0}")]
    Theta(String),
}

pub type Result<T> = std::result::Result<T, Error>;
