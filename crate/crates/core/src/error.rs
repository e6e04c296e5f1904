use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("diagonal offset {offset} outside [{min}, {max}]")]
    OffsetOutOfRange { offset: i64, min: i64, max: i64 },

    #[error("{op} is not supported on circulant topology")]
    TopologyUnsupported { op: &'static str },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("window of scale {scale} does not fit a period of size {size} (need 2N <= M)")]
    WindowTooWide { scale: usize, size: usize },

    #[error(
        "matrix is singular: pivot {pivot:e} at column {column} below threshold {threshold:e}"
    )]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("exponent overflow: {0}")]
    Overflow(String),

    #[error("condition number {0} is below 1")]
    InvalidKappa(f64),

    #[error("admissible decay-rate interval is empty (alpha_max = {alpha_max:e})")]
    EmptyDomain { alpha_max: f64 },

    #[error("no window scale up to {max_scale} satisfies the Neumann contraction condition")]
    NoConvergentScale { max_scale: usize },

    #[error("symbol vanishes at grid point {index} (|f| = {magnitude:e})")]
    SymbolVanishes { index: usize, magnitude: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("matrix market parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            expected: expected.into(),
            found: found.into(),
        }
    }
}
