use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    BadGridSize(usize),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("frequency {freq:?} outside the band of a grid with n = {n:?}")]
    FrequencyOutOfRange { freq: (i64, i64), n: (usize, usize) },

    #[error("weight must be strictly positive, found {value} at index {index}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frame function vanishes at index {index}")]
    VanishingFrame { index: usize },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("function is not real valued (max imaginary part {0:e})")]
    NotReal(f64),

    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),

    #[error("weight spec parse error at token {pos}: {msg}")]
    SpecParse { pos: usize, msg: String },

    #[error("partition levels [{jmin}, {jmax}] do not cover weight range [{min:e}, {max:e}]")]
    PartitionRange { jmin: i32, jmax: i32, min: f64, max: f64 },

    #[error("gimel construction failed: hilbert ratio {ratio:e} above cap after {retries} retries")]
    GimelRetries { ratio: f64, retries: usize },

    #[error("corrector denominator degenerates at level {level}, grid point ({i1}, {i2}): |d| = {modulus:e}")]
    CorrectorDenominator {
        level: i32,
        i1: usize,
        i2: usize,
        modulus: f64,
    },

    #[error("oracle did not converge on fiber {fiber} after {iterations} iterations")]
    FiberNonConvergence { fiber: usize, iterations: usize },

    #[error("problem is infeasible: f has spectral mass {leak:e} outside Y1 + Y2")]
    Infeasible { leak: f64 },

    #[error("torus file: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
