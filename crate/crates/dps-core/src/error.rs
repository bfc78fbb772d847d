use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum DpsError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid respacing count {count} for {t} steps")]
    InvalidCount { count: usize, t: usize },

    #[error("timestep {t} out of range [0, {t_max})")]
    TimestepOutOfRange { t: usize, t_max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("ddim step order: t_next={t_next} must be < t={t}")]
    InvalidStepOrder { t: usize, t_next: i64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unknown annealing profile: {0}")]
    UnknownProfile(String),

    #[error("dimension {d} too large for grid posterior (max 2)")]
    DimensionTooLarge { d: usize },

    #[error("image too small for SSIM window: {0}")]
    ImageTooSmall(String),

    #[error("empty input: {0}")]
    EmptyInput(String),
}

pub type Result<T> = std::result::Result<T, DpsError>;
