//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input outside the declared domain: coordinate {axis} = {value} not in [{lo}, {hi}]")]
    DomainViolation {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("matrix is not Hurwitz; eigenvalue real parts: {real_parts:?}")]
    NotHurwitz { real_parts: Vec<f64> },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state diverged at t = {t}: left the guard box (norm {norm})")]
    Divergence { t: f64, norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 config, 3 divergence, 4 precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 3,
            Error::Precondition(_) | Error::NotHurwitz { .. } => 4,
            _ => 2,
        }
    }
}
