use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coincident nodes: distance must be positive")]
    CoincidentNodes,
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("stale route: node {target} is not adjacent to node {from}")]
    StaleRoute { from: usize, target: usize },
    #[error("visited count {visited} exceeds node count {nodes}")]
    VisitedExceedsNodes { visited: usize, nodes: usize },
    #[error("no agents")]
    NoAgents,
    #[error("no providers configured")]
    NoProviders,
    #[error("empty series")]
    EmptySeries,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
