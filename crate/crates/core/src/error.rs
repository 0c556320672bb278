use thiserror::Error;

/// Errors produced by the geometric and numeric kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("conditioning error: {0}")]
    Conditioning(String),

    #[error("limit did not converge after {steps} steps in {context} (last iterates {last}, {prev})")]
    NonConvergence {
        steps: usize,
        prev: f64,
        last: f64,
        context: String,
    },

    #[error("strict convexity violation: {0}")]
    StrictConvexity(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("norm validation failed: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("level set does not intersect the box: {0}")]
    EmptyLevelSet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
