//! Link metric identifiability under two monitors.
//!
//! Given an undirected network and two monitor nodes, decide which link
//! metrics are uniquely determined by additive measurements over simple
//! monitor-to-monitor paths. Two engines are provided: a structural one that
//! works on the block–cut tree and the triconnected components of each block
//! ([`dil2m`]), and an exact brute-force one that enumerates paths and tests
//! row-space membership over the rationals ([`oracle`]).

pub mod agents;
pub mod connectivity;
pub mod decomposition;
pub mod dil2m;
pub mod error;
pub mod graph;
pub mod harness;
pub mod menger;
pub mod oracle;
pub mod report;

pub use error::{Error, Result};
pub use graph::{Graph, LinkId, LinkKind, MultiGraph, NodeId};
