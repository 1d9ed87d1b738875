use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("superoperator dimension {dim_squared} exceeds oracle budget {cap}")]
    BudgetExceeded { dim_squared: usize, cap: usize },

    #[error("degenerate pairing: <A A> = {0:e}")]
    DegeneratePairing(f64),

    #[error("generator row {row} is not finite after scaling (lambda = {lambda})")]
    Conditioning { row: usize, lambda: f64 },

    #[error("eigendecomposition rejected: residual {residual:e} above {threshold:e}")]
    Decomposition { residual: f64, threshold: f64 },

    #[error("nothing to project onto: stable and neutral sets are empty")]
    EmptyStableSet,

    #[error("stable eigenbasis is ill-conditioned (condition {condition:e})")]
    IllConditionedBasis { condition: f64 },

    #[error("post-stabilization check failed: {0}")]
    Verification(String),

    #[error("non-finite value in {stage} at index {index}")]
    NonFinite { stage: &'static str, index: usize },

    #[error("GQME solution diverged at step {step}")]
    Divergence { step: usize },

    #[error("grid mismatch: kernel has {kernel} samples, grid has {grid}")]
    GridMismatch { kernel: usize, grid: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed input {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit code: 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_) => 2,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
