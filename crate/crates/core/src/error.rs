use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which seed class an assembly was missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedClass {
    Foreground,
    Background,
}

impl std::fmt::Display for SeedClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeedClass::Foreground => f.write_str("foreground"),
            SeedClass::Background => f.write_str("background"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no {0} seeds were given")]
    MissingSeeds(SeedClass),

    #[error("pixel {index} is marked both foreground and background")]
    ConflictingSeeds { index: usize },

    #[error("lambda {lambda} is outside the convexity range [0, {min_weight}] (min edge weight)")]
    ConvexityViolation { lambda: f64, min_weight: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("system matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dense oracle refused a system of size {size} (limit {limit})")]
    OracleTooLarge { size: usize, limit: usize },

    #[error("system matrix is singular")]
    SingularSystem,

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("unknown code {code} at pixel ({x}, {y})")]
    UnknownCode { code: u8, x: usize, y: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
