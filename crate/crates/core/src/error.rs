use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node {node} is out of range (graph has {n} nodes)")]
    NodeOutOfRange { node: NodeId, n: usize },

    #[error("seed set is empty")]
    NoSeeds,

    #[error("node {0} is a seed and cannot be blocked")]
    BlockSeed(NodeId),

    #[error("node {0} appears twice in the blocker set")]
    DuplicateBlocker(NodeId),

    #[error("seeds influence no one")]
    EmptyPopulation,

    #[error("node {0} is not an out-neighbor of the seed set")]
    NotOutNeighbor(NodeId),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("seed {0} is not a node of the graph")]
    UnknownSeed(u64),

    #[error("exact enumeration refused: {0}")]
    OracleLimit(String),

    #[error("unsupported cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
