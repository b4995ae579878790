//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A grid value is nonzero outside the supported region.
    #[error("support violation: value {value} at pixel ({row}, {col}) has radius {radius:.6} >= {limit:.6}")]
    SupportViolation {
        row: usize,
        col: usize,
        value: f64,
        radius: f64,
        limit: f64,
    },

    /// A phantom primitive extends outside the support margin.
    #[error("primitive outside support margin: {0}")]
    PrimitiveOutsideSupport(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {error:.3e} > tolerance {tolerance:.3e} after {subdivisions} subdivisions")]
    QuadratureNonConvergence {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    /// Triangular substitution hit a (near-)zero diagonal entry.
    #[error("ill-conditioned diagonal at row {index}: |{value:.3e}| < {threshold:.3e}; use the tikhonov or tsvd method instead")]
    IllConditionedDiagonal {
        index: usize,
        value: f64,
        threshold: f64,
    },

    /// An operation required a nonzero norm.
    #[error("zero norm: {0}")]
    ZeroNorm(String),

    /// Generic numerical failure (non-finite values, failed factorization, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Stored data does not match its sidecar description.
    #[error("format mismatch: {0}")]
    FormatMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    ///
    /// The CLI maps these to exit code 2, everything else to exit code 1.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::IllConditionedDiagonal { .. }
                | Error::ZeroNorm(_)
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
