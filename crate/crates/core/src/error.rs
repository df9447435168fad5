use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample is empty (n = 0)")]
    EmptySample,

    #[error("at least two alleles are required, got k = {0}")]
    TooFewAlleles(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector length {0} is not a triangular number k(k+1)/2 with k >= 2")]
    NotTriangular(usize),

    #[error("tolerance epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("significance level alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("projection onto the HWE family did not converge")]
    NonConverged,

    #[error("negative variance {0:e} (numerical failure)")]
    NegativeVariance(f64),

    #[error("minimum tolerance undefined: radicand {0:e} is negative")]
    NegativeRadicand(f64),

    #[error("bootstrap skipped {skipped} of {replicates} replicates (projection failed)")]
    TooManySkipped { skipped: usize, replicates: usize },

    #[error("boundary search aborted after {0} rejected resamples")]
    AbortBoundarySearch(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
