use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("invalid edge: {0}")]
    InvalidEdge(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
