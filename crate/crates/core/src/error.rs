use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("grid size {0} must be a power of two and at least 4")]
    GridSize(usize),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },
    #[error("dyadic collection is not a convex tree: {0}")]
    NotConvex(String),
    #[error("input {0} vanishes identically")]
    ZeroInput(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> LabError {
    LabError::Param {
        name,
        reason: reason.into(),
    }
}
