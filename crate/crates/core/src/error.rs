use std::io;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate edge {from} -> {to}")]
    DuplicateEdge {
        line: usize,
        from: NodeId,
        to: NodeId,
    },

    #[error("line {line}: node id {id} exceeds the supported id range")]
    NodeIdOverflow { line: usize, id: u64 },

    #[error("line {line}: weight {weight} must be strictly positive")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("line {line}: unknown node {id} (graph has {n} nodes)")]
    UnknownNode { line: usize, id: u64, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reverse push from target {target} exceeded the budget of {budget} pushes")]
    BudgetExceeded { target: NodeId, budget: u64 },

    #[error("exact computation on {n} nodes exceeds the oracle cap of {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index format error: {0}")]
    Format(String),

    #[error("index checksum mismatch")]
    Checksum,

    #[error("index was built for a different graph")]
    FingerprintMismatch,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
