use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node {node} out of range for a network of {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({source_node}, {target}) has invalid weight {weight}")]
    InvalidWeight { source_node: usize, target: usize, weight: f64 },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("not a spanning tree: {0}")]
    NotSpanningTree(String),
    #[error("cluster {cluster} induced subgraph is not strongly connected")]
    DisconnectedCluster { cluster: usize },
    #[error("network is not connected")]
    DisconnectedNetwork,
    #[error("cycle detected through nodes {cycle:?}")]
    CycleDetected { cycle: Vec<usize> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
