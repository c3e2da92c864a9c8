use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum GedError {
    #[error("graph is invalid: {0}")]
    InvalidGraph(String),

    #[error("padding size {requested} is smaller than the larger graph ({needed} nodes)")]
    PaddingTooSmall { requested: usize, needed: usize },

    #[error("node pair ({0}, {0}) is a self-pair")]
    SelfPair(usize),

    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid cost configuration: {0}")]
    InvalidCosts(String),

    #[error("{n} nodes exceeds the exact solver bound of {bound}; enable branch-and-bound (bound {bb_bound})")]
    Capability {
        n: usize,
        bound: usize,
        bb_bound: usize,
    },

    #[error("graph `{id}` has {n} nodes, over the exact solver bound of {bound}")]
    OversizedGraph { id: String, n: usize, bound: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid edit path at step {step}: {reason}")]
    InvalidEditPath { step: usize, reason: String },

    #[error("surrogate choice is inconsistent: {0}")]
    InvalidChoice(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("training diverged: loss is NaN at epoch {epoch}, batch {batch}")]
    NanLoss { epoch: usize, batch: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GedError>;
