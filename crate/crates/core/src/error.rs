use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min:e}, max eigenvalue {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive enumeration refused; the cost grows like `2^size`.
    #[error("{what}: size {size} exceeds cap {cap} (exponential cost; pass force to override)")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Unreadable or malformed input file.
    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
