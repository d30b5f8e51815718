use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite covariate entry at point {point}, coordinate {coord}")]
    NonFinite { point: usize, coord: usize },

    #[error("empty subset: {context}")]
    EmptySubset { context: &'static str },

    #[error("tail rank floor(alpha * n) is zero (alpha={alpha}, n={n}); alpha is too small for n")]
    DegenerateTailRank { alpha: f64, n: usize },

    #[error("{what} must divide n: {divisor} does not divide {n}")]
    Indivisible {
        what: &'static str,
        divisor: usize,
        n: usize,
    },

    #[error(
        "exhaustive enumeration would produce {count} masks, above the cap of {cap}; \
         use lpo_masks_balanced instead"
    )]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {context} (expected {expected}, got {got})")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
