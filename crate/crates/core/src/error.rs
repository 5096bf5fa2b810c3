use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: duplicate edge ({a}, {b})")]
    DuplicateEdge { line: usize, a: usize, b: usize },

    #[error("node {node} has no incident edge; node ids must be contiguous")]
    NodeGap { node: usize },

    #[error("edge ({a}, {b}) references a node outside 0..{node_count}")]
    NodeOutOfRange {
        a: usize,
        b: usize,
        node_count: usize,
    },

    #[error("graph has no edges")]
    NoEdges,

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("cameras have coincident centers (fundamental matrix vanishes)")]
    CoincidentCenters,

    #[error("no generic configuration found after {retries} draws")]
    DegenerateConfiguration { retries: usize },

    #[error("gauge edge ({0}, {1}) is not an edge of the graph")]
    GaugeEdgeNotInGraph(usize, usize),

    #[error("constraint does not vanish on edge {edge} (residual {residual:e})")]
    ConstraintViolated { edge: usize, residual: f64 },

    #[error("seed list is empty")]
    EmptySeeds,

    #[error("eigensolver failed: {0}")]
    Convergence(String),

    #[error("component extraction made no progress on edge ({0}, {1})")]
    NoProgress(usize, usize),

    #[error("{0}")]
    OutOfRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
