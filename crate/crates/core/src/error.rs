use thiserror::Error;

/// Errors raised by the solver, probes and run orchestration.
#[derive(Debug, Error)]
pub enum SqgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("numerical instability: non-finite field at t = {time}")]
    Instability { time: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("successive approximations diverge at iterate {iterate}")]
    Divergence { iterate: usize },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SqgError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SqgError::InvalidInput(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SqgError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SqgError>;
