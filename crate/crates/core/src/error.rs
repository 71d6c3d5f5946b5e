use thiserror::Error;

/// Errors raised by the model, preprocessing, sampler and reporting layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data quality: {0}")]
    DataQuality(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("diagnostic undefined: {0}")]
    DiagnosticUndefined(String),
    #[error("initialization failed: {0}")]
    Initialization(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
