use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum BcsError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("enumeration budget exceeded: {needed} subsets, budget {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, BcsError>;

impl BcsError {
    pub fn dimension(msg: impl Into<String>) -> Self {
        BcsError::Dimension(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        BcsError::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        BcsError::Shape(msg.into())
    }
}
