//! Simple undirected graphs with two monitor marks, and the multigraphs used
//! inside decompositions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Normalized unordered pair, smaller id first.
pub fn pair(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Anything that exposes nodes and (possibly parallel) undirected links.
pub trait Topology {
    fn node_ids(&self) -> Vec<NodeId>;
    fn link_ends(&self) -> Vec<(NodeId, NodeId)>;
}

/// A validated simple undirected graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    nodes: BTreeSet<NodeId>,
    links: BTreeMap<LinkId, (NodeId, NodeId)>,
    monitors: Option<(NodeId, NodeId)>,
    metrics: Option<BTreeMap<LinkId, BigRational>>,
    adjacency: BTreeMap<NodeId, Vec<(NodeId, LinkId)>>,
}

impl Graph {
    /// Validates and builds a graph. Link ids are positions in `edges`.
    pub fn build(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: &[(NodeId, NodeId)],
        monitors: Option<(NodeId, NodeId)>,
    ) -> Result<Self> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let links = edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (LinkId(i as u32), e))
            .collect::<Vec<_>>();
        Self::from_links(nodes, links, monitors)
    }

    /// Builds a graph keeping the given link ids (used for subgraphs).
    pub fn from_links(
        nodes: BTreeSet<NodeId>,
        links: impl IntoIterator<Item = (LinkId, (NodeId, NodeId))>,
        monitors: Option<(NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut map = BTreeMap::new();
        let mut adjacency: BTreeMap<NodeId, Vec<(NodeId, LinkId)>> =
            nodes.iter().map(|&v| (v, Vec::new())).collect();
        for (id, (u, v)) in links {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            for w in [u, v] {
                if !nodes.contains(&w) {
                    return Err(Error::UnknownNode(w));
                }
            }
            let p = pair(u, v);
            if !seen.insert(p) {
                return Err(Error::DuplicateEdge(p.0, p.1));
            }
            map.insert(id, p);
            adjacency.get_mut(&u).unwrap().push((v, id));
            adjacency.get_mut(&v).unwrap().push((u, id));
        }
        for list in adjacency.values_mut() {
            list.sort();
        }
        if let Some((a, b)) = monitors {
            for m in [a, b] {
                if !nodes.contains(&m) {
                    return Err(Error::MonitorNotInGraph(m));
                }
            }
            if a == b {
                return Err(Error::MonitorsNotDistinct(a));
            }
        }
        Ok(Self {
            nodes,
            links: map,
            monitors,
            metrics: None,
            adjacency,
        })
    }

    pub fn with_monitors(mut self, m1: NodeId, m2: NodeId) -> Result<Self> {
        for m in [m1, m2] {
            if !self.nodes.contains(&m) {
                return Err(Error::MonitorNotInGraph(m));
            }
        }
        if m1 == m2 {
            return Err(Error::MonitorsNotDistinct(m1));
        }
        self.monitors = Some((m1, m2));
        Ok(self)
    }

    pub fn with_metrics(mut self, metrics: BTreeMap<LinkId, BigRational>) -> Result<Self> {
        for (id, w) in &metrics {
            if !self.links.contains_key(id) {
                return Err(Error::UnknownLink(*id));
            }
            if !w.is_positive() {
                return Err(Error::NonPositiveMetric(*id));
            }
        }
        self.metrics = Some(metrics);
        Ok(self)
    }

    pub fn without_metrics(mut self) -> Self {
        self.metrics = None;
        self
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn links(&self) -> &BTreeMap<LinkId, (NodeId, NodeId)> {
        &self.links
    }

    pub fn monitors(&self) -> Option<(NodeId, NodeId)> {
        self.monitors
    }

    pub fn require_monitors(&self) -> Result<(NodeId, NodeId)> {
        self.monitors.ok_or(Error::MonitorsUnset)
    }

    pub fn metrics(&self) -> Option<&BTreeMap<LinkId, BigRational>> {
        self.metrics.as_ref()
    }

    /// Number of nodes, |G|.
    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    /// Number of links, ||G||.
    pub fn order(&self) -> usize {
        self.links.len()
    }

    pub fn ends(&self, link: LinkId) -> Option<(NodeId, NodeId)> {
        self.links.get(&link).copied()
    }

    /// Sorted `(neighbor, link)` list of a node.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, LinkId)] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn link_between(&self, u: NodeId, v: NodeId) -> Option<LinkId> {
        self.neighbors(u)
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, l)| l)
    }

    pub fn is_monitor(&self, v: NodeId) -> bool {
        matches!(self.monitors, Some((a, b)) if a == v || b == v)
    }

    /// Subgraph spanned by a set of links; monitors and metrics dropped.
    pub fn link_subgraph(&self, links: &BTreeSet<LinkId>) -> Graph {
        let mut nodes = BTreeSet::new();
        let mut kept = Vec::new();
        for l in links {
            let (u, v) = self.links[l];
            nodes.insert(u);
            nodes.insert(v);
            kept.push((*l, (u, v)));
        }
        Graph::from_links(nodes, kept, None).expect("subgraph of a valid graph is valid")
    }

    /// Canonical edge list, used as a fingerprint.
    pub fn fingerprint(&self) -> Vec<(NodeId, NodeId)> {
        let mut v: Vec<_> = self.links.values().copied().collect();
        v.sort();
        v
    }
}

impl Topology for Graph {
    fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().copied().collect()
    }

    fn link_ends(&self) -> Vec<(NodeId, NodeId)> {
        self.links.values().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Real,
    Virtual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiLink {
    pub id: LinkId,
    pub ends: (NodeId, NodeId),
    pub kind: LinkKind,
}

/// Undirected multigraph whose links are tagged real or virtual.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiGraph {
    pub nodes: BTreeSet<NodeId>,
    pub links: Vec<MultiLink>,
}

impl MultiGraph {
    pub fn from_graph(g: &Graph) -> Self {
        Self {
            nodes: g.nodes.clone(),
            links: g
                .links
                .iter()
                .map(|(&id, &ends)| MultiLink {
                    id,
                    ends,
                    kind: LinkKind::Real,
                })
                .collect(),
        }
    }

    pub fn add_link(&mut self, id: LinkId, u: NodeId, v: NodeId, kind: LinkKind) {
        self.nodes.insert(u);
        self.nodes.insert(v);
        self.links.push(MultiLink {
            id,
            ends: pair(u, v),
            kind,
        });
    }

    pub fn real_links(&self) -> impl Iterator<Item = &MultiLink> {
        self.links.iter().filter(|l| l.kind == LinkKind::Real)
    }

    pub fn virtual_links(&self) -> impl Iterator<Item = &MultiLink> {
        self.links.iter().filter(|l| l.kind == LinkKind::Virtual)
    }

    pub fn link(&self, id: LinkId) -> Option<&MultiLink> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn max_link_id(&self) -> Option<LinkId> {
        self.links.iter().map(|l| l.id).max()
    }
}

impl Topology for MultiGraph {
    fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().copied().collect()
    }

    fn link_ends(&self) -> Vec<(NodeId, NodeId)> {
        self.links.iter().map(|l| l.ends).collect()
    }
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::BadMetric(s.to_string());
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{}{}", int, frac);
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MetricLiteral {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<u32>,
    edges: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    monitors: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metrics: Option<BTreeMap<String, MetricLiteral>>,
}

impl Graph {
    /// Reads the JSON graph format. Link ids are positions in `edges`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let edges: Vec<_> = file
            .edges
            .iter()
            .map(|&[u, v]| (NodeId(u), NodeId(v)))
            .collect();
        let monitors = file.monitors.map(|[a, b]| (NodeId(a), NodeId(b)));
        let g = Graph::build(file.nodes.into_iter().map(NodeId), &edges, monitors)?;
        match file.metrics {
            None => Ok(g),
            Some(raw) => {
                let mut metrics = BTreeMap::new();
                for (k, lit) in raw {
                    let idx: u32 = k.trim().parse().map_err(|_| Error::BadMetric(k.clone()))?;
                    let text = match lit {
                        MetricLiteral::Text(s) => s,
                        MetricLiteral::Number(n) => n.to_string(),
                    };
                    metrics.insert(LinkId(idx), parse_rational(&text)?);
                }
                g.with_metrics(metrics)
            }
        }
    }

    /// Writes the JSON graph format. Links are emitted in id order, so ids
    /// survive a round trip only when they are `0..order`.
    pub fn to_json(&self) -> String {
        let index: BTreeMap<LinkId, usize> =
            self.links.keys().enumerate().map(|(i, &l)| (l, i)).collect();
        let file = GraphFile {
            nodes: self.nodes.iter().map(|n| n.0).collect(),
            edges: self.links.values().map(|&(u, v)| [u.0, v.0]).collect(),
            monitors: self.monitors.map(|(a, b)| [a.0, b.0]),
            metrics: self.metrics.as_ref().map(|m| {
                m.iter()
                    .map(|(l, w)| (index[l].to_string(), MetricLiteral::Text(format_rational(w))))
                    .collect()
            }),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }
}
