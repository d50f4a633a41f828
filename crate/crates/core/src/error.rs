use thiserror::Error;

use crate::tree::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("node id must be positive")]
    ZeroId,
    #[error("node {0} has more than one parent")]
    DuplicateParent(NodeId),
    #[error("cycle detected through node {0}")]
    Cycle(NodeId),
    #[error("root {0} has a parent")]
    RootHasParent(NodeId),
    #[error("node {0} is unreachable from the root")]
    Unreachable(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("level {level} out of range (height {height})")]
    LevelOutOfRange { level: usize, height: usize },
    #[error("coalition is not trimmed")]
    NotTrimmed,
    #[error("agent {0} already belongs to the coalition")]
    AgentInCoalition(NodeId),
    #[error("value function: {0}")]
    ValueFunction(String),
    #[error("no value supplied for trimmed coalition {0:?}")]
    UncoveredCoalition(Vec<NodeId>),
    #[error("{what} needs n <= {limit}, tree has {n} nodes")]
    LimitExceeded { what: &'static str, n: usize, limit: usize },
    #[error("allocation does not match the game: {0}")]
    AllocationMismatch(String),
    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("invalid arguments: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
