use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input files; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Artifacts were written but the chains did not mix; exit code 3.
    #[error("not converged: max R-hat {max_rhat:.4} >= {threshold} ({worst})")]
    NotConverged { max_rhat: f64, threshold: f64, worst: String },
    /// No finite starting point; exit code 4.
    #[error("{0}")]
    Init(String),
    #[error(transparent)]
    Core(#[from] aging_rate::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotConverged { .. } => 3,
            CliError::Init(_) => 4,
            CliError::Core(aging_rate::Error::Initialization(_)) => 4,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }

    /// Errors raised while reading inputs are configuration problems.
    pub fn input(e: aging_rate::Error) -> Self {
        match e {
            aging_rate::Error::Initialization(m) => CliError::Init(m),
            other => CliError::Config(other.to_string()),
        }
    }
}
