use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// A point or component that the system does not declare.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Every cluster of a measure fell below the weight floor.
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// serde_json's message already carries the line and column.
impl From<serde_json::Error> for LabError {
    fn from(err: serde_json::Error) -> Self {
        LabError::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
