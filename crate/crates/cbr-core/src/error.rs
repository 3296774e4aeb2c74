use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside its mathematical domain (e.g. probability not in (0,1)).
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix dimensions do not agree.
    #[error("shape error: {0}")]
    Shape(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Non-finite value produced or consumed during training.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Metric undefined for the given scores (e.g. a class is empty).
    #[error("metric error: {0}")]
    Metric(String),

    /// Hyperparameter tuning could not form usable validation folds.
    #[error("tuning error: {0}")]
    Tuning(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
