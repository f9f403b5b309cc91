use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched lengths, bad counts or out-of-range arguments.
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cohort selection: {0}")]
    Selection(String),
    /// The sampler could not find a start with finite log-posterior.
    #[error("fit failed: {0}")]
    Initialization(String),
    #[error("summary error: {0}")]
    Summary(String),
    #[error("diagnostic error: {0}")]
    Diagnostic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
