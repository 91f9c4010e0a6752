use thiserror::Error;

/// Errors produced by the evaluators and samplers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("repeated spectral values: use the confluent evaluation path")]
    ConfluentRequired,

    #[error("numerical degeneracy in {what} (condition estimate {cond:.3e})")]
    Degenerate { what: String, cond: f64 },

    #[error("chain configuration error: {0}")]
    ChainConfig(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("function evaluation returned a non-finite value at {at}")]
    Evaluation { at: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
