use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("chirality operator required for even dimension {0}")]
    MissingChirality(usize),

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("segment {index} is not causal: g(v,v) = {norm:e}")]
    SpacelikeSegment { index: usize, norm: f64 },

    #[error("gradient inconsistent with value at {point:?}: relative error {error:e}")]
    InconsistentGradient { point: Vec<f64>, error: f64 },

    #[error("no member of the family is steep on the validation grid")]
    EmptyFamily,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),
}
