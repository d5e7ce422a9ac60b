use thiserror::Error;

use crate::graph::NodeId;

/// Errors shared by every module in the crate.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("self loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("walk is empty")]
    EmptyWalk,
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("instance with {n} nodes exceeds limit {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("cluster of size {cluster_size} with shell size {shell_size} is not coarsenable")]
    NotCoarsenable {
        cluster_size: usize,
        shell_size: usize,
    },
    #[error("cluster covers the whole graph; nothing would remain after contraction")]
    ClusterIsWholeGraph,
    #[error("walk is not a covering closed walk of the coarse graph: {0}")]
    NotACoarseWalk(String),
    #[error("bulk node {bulk} visited {count} times; expected exactly one visit")]
    BulkVisitedNotOnce { bulk: NodeId, count: usize },
    #[error("walk neighbor {node} of bulk node {bulk} lies outside its cluster")]
    FlankNotInCluster { node: NodeId, bulk: NodeId },
    #[error("cluster node does not occur in the walk")]
    ClusterNodeAbsentFromWalk,
    #[error("join requires two distinct labels, got {0} twice")]
    JoinSameLabel(u32),
    #[error("cluster {cluster_index} has {missing} missing internal links; builder requires none")]
    MuNonZero {
        cluster_index: usize,
        missing: usize,
    },
    #[error("cluster set does not cover the graph")]
    CoverageGap,
    #[error("infeasible generator parameters: {0}")]
    ParamsInfeasible(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid input: {0}")]
    Format(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
