use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::connectivity::is_connected;
use crate::error::{Error, Result};
use crate::graph::{Graph, LinkId, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub id: usize,
    pub links: BTreeSet<LinkId>,
    pub nodes: BTreeSet<NodeId>,
}

impl Block {
    pub fn is_bridge(&self) -> bool {
        self.links.len() == 1
    }
}

/// Biconnected components with the cut vertices that join them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockCutTree {
    pub blocks: Vec<Block>,
    pub cut_vertices: BTreeSet<NodeId>,
    /// Tree edges `(block id, cut vertex)`.
    pub adjacency: Vec<(usize, NodeId)>,
}

impl BlockCutTree {
    pub fn block(&self, id: usize) -> Result<&Block> {
        self.blocks.get(id).ok_or(Error::UnknownBlock(id))
    }

    pub fn block_of_link(&self, link: LinkId) -> Option<&Block> {
        self.blocks.iter().find(|b| b.links.contains(&link))
    }

    pub fn blocks_at(&self, v: NodeId) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(move |b| b.nodes.contains(&v))
    }
}

struct Tarjan<'g> {
    g: &'g Graph,
    disc: BTreeMap<NodeId, usize>,
    low: BTreeMap<NodeId, usize>,
    stack: Vec<LinkId>,
    found: Vec<BTreeSet<LinkId>>,
    time: usize,
}

impl Tarjan<'_> {
    fn visit(&mut self, u: NodeId, via: Option<LinkId>) {
        self.time += 1;
        self.disc.insert(u, self.time);
        self.low.insert(u, self.time);
        for &(w, l) in self.g.neighbors(u) {
            if Some(l) == via {
                continue;
            }
            match self.disc.get(&w).copied() {
                None => {
                    self.stack.push(l);
                    self.visit(w, Some(l));
                    let lw = self.low[&w];
                    if lw < self.low[&u] {
                        self.low.insert(u, lw);
                    }
                    if lw >= self.disc[&u] {
                        let mut comp = BTreeSet::new();
                        while let Some(top) = self.stack.pop() {
                            comp.insert(top);
                            if top == l {
                                break;
                            }
                        }
                        self.found.push(comp);
                    }
                }
                Some(dw) if dw < self.disc[&u] => {
                    self.stack.push(l);
                    if dw < self.low[&u] {
                        self.low.insert(u, dw);
                    }
                }
                Some(_) => {}
            }
        }
    }
}

/// Block–cut tree of a connected graph; bridges become single-link blocks.
pub fn biconnected_components(g: &Graph) -> Result<BlockCutTree> {
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let mut t = Tarjan {
        g,
        disc: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        found: Vec::new(),
        time: 0,
    };
    if let Some(&root) = g.nodes().iter().next() {
        t.visit(root, None);
    }
    let mut sets = t.found;
    sets.sort_by_key(|s| *s.iter().next().expect("blocks are non-empty"));
    let blocks: Vec<Block> = sets
        .into_iter()
        .enumerate()
        .map(|(id, links)| {
            let nodes = links
                .iter()
                .flat_map(|l| {
                    let (u, v) = g.ends(*l).unwrap();
                    [u, v]
                })
                .collect();
            Block { id, links, nodes }
        })
        .collect();
    let mut count: BTreeMap<NodeId, usize> = BTreeMap::new();
    for b in &blocks {
        for &v in &b.nodes {
            *count.entry(v).or_default() += 1;
        }
    }
    let cut_vertices: BTreeSet<NodeId> = count
        .into_iter()
        .filter(|&(_, c)| c >= 2)
        .map(|(v, _)| v)
        .collect();
    let adjacency = blocks
        .iter()
        .flat_map(|b| {
            b.nodes
                .iter()
                .filter(|v| cut_vertices.contains(v))
                .map(move |&v| (b.id, v))
        })
        .collect();
    Ok(BlockCutTree {
        blocks,
        cut_vertices,
        adjacency,
    })
}

/// Nodes whose removal disconnects a connected graph.
pub fn cut_vertices(g: &Graph) -> Result<BTreeSet<NodeId>> {
    Ok(biconnected_components(g)?.cut_vertices)
}
