//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M\u{2020}| = {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid subsystem indices: {0}")]
    BadIndices(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target probability {target} never reached on the time grid; max P attained = {max_p:.6}")]
    TargetNeverReached { target: f64, max_p: f64 },

    #[error(
        "no final states within window {window:.6e} around E = {center:.6e}; \
         nearest level lies at |dE| = {nearest:.6e}"
    )]
    EmptyWindow {
        window: f64,
        center: f64,
        nearest: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
