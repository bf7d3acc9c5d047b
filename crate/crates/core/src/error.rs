use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("locations {0} and {1} coincide (closer than 1e-12 in native units)")]
    DuplicateLocation(usize, usize),

    #[error("coordinate out of range for lon/lat: ({0}, {1})")]
    CoordinateOutOfRange(f64, f64),

    #[error("distance metrics of the two location sets do not match")]
    MetricMismatch,

    /// The leading minor ending at global row/column `pivot` is not positive
    /// definite. Usually fixed by adding a small nugget to the covariance.
    #[error("matrix not positive definite at pivot {pivot}; consider a nonzero nugget")]
    NotPositiveDefinite { pivot: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all likelihood evaluations failed")]
    FitFailed,

    #[error("cross-validation fold {fold} failed: {source}")]
    FoldFailed { fold: usize, source: Box<Error> },

    #[error("task kernel panicked: {0}")]
    KernelPanic(String),

    #[error("{path}:{line}: {msg}")]
    Csv { path: String, line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
