use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A Fock cutoff or matrix dimension is unusable.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// A physical parameter lies outside its allowed range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operands have incompatible shapes or mode counts.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Fock truncation discards more weight than the configured policy allows.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// A numerical integration or evaluation did not reach its tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// The heralding event has zero probability.
    #[error("herald impossible: {0}")]
    HeraldImpossible(String),

    /// Monte Carlo sampling failed.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// A pure state was required.
    #[error("state is not pure: {0}")]
    NotPure(String),

    /// A density operator failed validation.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Tomographic reconstruction failed.
    #[error("tomography error: {0}")]
    Tomography(String),

    /// Malformed text input, with the 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("IO error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
