use thiserror::Error;

/// Errors raised by the lab. Each variant maps onto a CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KacError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("accuracy error: {message} (estimate {estimate:e}, tolerance {tolerance:e})")]
    Accuracy {
        message: String,
        estimate: f64,
        tolerance: f64,
    },

    #[error("capacity error: Fock dimension {dimension} exceeds cap {cap}")]
    Capacity { dimension: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("optimizer did not converge: {message} (best value {best_value:e} at {best_point:?})")]
    NonConvergence {
        message: String,
        best_value: f64,
        best_point: Vec<f64>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("missing records: {0}")]
    MissingRecords(String),

    #[error("io error: {0}")]
    Io(String),
}

impl KacError {
    pub fn config(msg: impl Into<String>) -> Self {
        KacError::Config(vec![msg.into()])
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        KacError::Domain(msg.into())
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            KacError::Config(_) | KacError::Domain(_) => 2,
            KacError::Accuracy { .. } | KacError::NonConvergence { .. } => 3,
            KacError::Capacity { .. } => 4,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for KacError {
    fn from(e: std::io::Error) -> Self {
        KacError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, KacError>;
