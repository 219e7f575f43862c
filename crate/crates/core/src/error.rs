use thiserror::Error;

use crate::graph::{LinkId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("monitor {0} is not a node of the graph")]
    MonitorNotInGraph(NodeId),
    #[error("monitors must be two distinct nodes, got {0} twice")]
    MonitorsNotDistinct(NodeId),
    #[error("monitors are not set")]
    MonitorsUnset,
    #[error("metric on link {0} must be strictly positive")]
    NonPositiveMetric(LinkId),
    #[error("metric refers to unknown link {0}")]
    UnknownLink(LinkId),
    #[error("invalid metric literal {0:?}")]
    BadMetric(String),
    #[error("graph has {nodes} nodes, too small for {k}-connectivity")]
    TooSmall { nodes: usize, k: usize },
    #[error("connectivity order {0} is not supported (expected 1, 2 or 3)")]
    UnsupportedOrder(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("block is not biconnected")]
    NotBiconnected,
    #[error("virtual link {0} is not paired across exactly two components")]
    BrokenPairing(LinkId),
    #[error("pair ({0}, {1}) is not a split pair of the component")]
    UnknownPair(NodeId, NodeId),
    #[error("unknown block {0}")]
    UnknownBlock(usize),
    #[error("block {block} has {count} monitoring agents, expected 2")]
    WrongAgentCount { block: usize, count: usize },
    #[error("no replacement path for virtual link {0}")]
    NoPath(LinkId),
    #[error("conflicting verdicts for link {link}: {first} vs {second}")]
    RuleConflict {
        link: LinkId,
        first: String,
        second: String,
    },
    #[error("more than {cap} measurement paths (reached {reached})")]
    PathExplosion { cap: usize, reached: usize },
    #[error("measurement system is inconsistent")]
    InconsistentSystem,
    #[error("graph enumeration limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("graph generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
