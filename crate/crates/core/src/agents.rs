//! Monitoring agents: where each monitor enters each block.
//!
//! Measurements reach a block only through the node at which the monitor's
//! side of the block–cut tree attaches. That node is the block's agent for
//! the monitor. It acts like a monitor for every link in the block except
//! the one joining the two agents directly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::decomposition::{Block, BlockCutTree};
use crate::error::{Error, Result};
use crate::graph::{Graph, LinkId, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Agent {
    pub node: NodeId,
    pub is_real_monitor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockAgents {
    pub block: usize,
    /// Agent for the first and second monitor; equal when both monitors
    /// reach the block through the same node.
    pub per_monitor: [NodeId; 2],
    /// Distinct agents in monitor order.
    pub agents: Vec<Agent>,
}

impl BlockAgents {
    /// The two distinct agents, when there are two.
    pub fn pair(&self) -> Option<(Agent, Agent)> {
        match self.agents[..] {
            [a, b] => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_agent(&self, v: NodeId) -> bool {
        self.agents.iter().any(|a| a.node == v)
    }

    pub fn is_real_monitor(&self, v: NodeId) -> bool {
        self.agents.iter().any(|a| a.node == v && a.is_real_monitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentAssignment {
    pub monitors: (NodeId, NodeId),
    pub blocks: Vec<BlockAgents>,
}

impl AgentAssignment {
    pub fn block(&self, id: usize) -> Result<&BlockAgents> {
        self.blocks.get(id).ok_or(Error::UnknownBlock(id))
    }

    /// `{"<block id>": [{"node": n, "is_real_monitor": b}, ...]}`
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .blocks
            .iter()
            .map(|b| (b.block.to_string(), serde_json::to_value(&b.agents).expect("plain data")))
            .collect();
        serde_json::Value::Object(map)
    }
}

// Node → representative after joining every link outside `skip`.
fn components_without(g: &Graph, skip: &BTreeSet<LinkId>) -> BTreeMap<NodeId, NodeId> {
    let mut parent: BTreeMap<NodeId, NodeId> = g.nodes().iter().map(|&v| (v, v)).collect();
    fn find(p: &mut BTreeMap<NodeId, NodeId>, v: NodeId) -> NodeId {
        let mut r = v;
        while p[&r] != r {
            r = p[&r];
        }
        let mut c = v;
        while p[&c] != r {
            let next = p[&c];
            p.insert(c, r);
            c = next;
        }
        r
    }
    for (l, &(u, v)) in g.links() {
        if skip.contains(l) {
            continue;
        }
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent.insert(a.max(b), a.min(b));
        }
    }
    let nodes: Vec<NodeId> = g.nodes().iter().copied().collect();
    nodes.into_iter().map(|v| (v, find(&mut parent, v))).collect()
}

fn agent_in(g: &Graph, block: &Block, monitor: NodeId) -> NodeId {
    if block.nodes.contains(&monitor) {
        return monitor;
    }
    // with the block's links removed every block node heads its own region
    let comp = components_without(g, &block.links);
    let target = comp[&monitor];
    *block
        .nodes
        .iter()
        .find(|v| comp[v] == target)
        .expect("connected graph: some block node reaches the monitor")
}

/// Agents of every block of `bct`.
pub fn locate_agents(g: &Graph, bct: &BlockCutTree) -> Result<AgentAssignment> {
    let (m1, m2) = g.require_monitors()?;
    let blocks = bct
        .blocks
        .iter()
        .map(|b| {
            let a1 = agent_in(g, b, m1);
            let a2 = agent_in(g, b, m2);
            let mut agents = vec![Agent {
                node: a1,
                is_real_monitor: a1 == m1,
            }];
            if a2 != a1 {
                agents.push(Agent {
                    node: a2,
                    is_real_monitor: a2 == m2,
                });
            } else if a2 == m2 {
                agents[0].is_real_monitor = true;
            }
            BlockAgents {
                block: b.id,
                per_monitor: [a1, a2],
                agents,
            }
        })
        .collect();
    Ok(AgentAssignment {
        monitors: (m1, m2),
        blocks,
    })
}

pub fn distinct_agent_count(assignment: &AgentAssignment, block: usize) -> Result<usize> {
    Ok(assignment.block(block)?.agents.len())
}

/// Path from the agent of `block` for `monitor` out to the monitor, using
/// no link of the block. `None` when the agent is the monitor itself.
pub fn connecting_path(
    g: &Graph,
    bct: &BlockCutTree,
    block: usize,
    monitor: NodeId,
) -> Result<Option<Vec<NodeId>>> {
    let b = bct.block(block)?;
    let agent = agent_in(g, b, monitor);
    if agent == monitor {
        return Ok(None);
    }
    let mut prev: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut queue = VecDeque::from([agent]);
    prev.insert(agent, agent);
    while let Some(u) = queue.pop_front() {
        if u == monitor {
            break;
        }
        for &(w, l) in g.neighbors(u) {
            if !b.links.contains(&l) && !prev.contains_key(&w) {
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![monitor];
    let mut v = monitor;
    while v != agent {
        v = prev[&v];
        path.push(v);
    }
    path.reverse();
    Ok(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::biconnected_components;

    fn graph(n: u32, edges: &[(u32, u32)], mon: (u32, u32)) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        Graph::build((0..n).map(NodeId), &e, Some((NodeId(mon.0), NodeId(mon.1)))).unwrap()
    }

    fn agents(a: &BlockAgents) -> Vec<(u32, bool)> {
        a.agents.iter().map(|x| (x.node.0, x.is_real_monitor)).collect()
    }

    #[test]
    fn bowtie_agents() {
        // triangles 0-1-2 and 2-3-4 share node 2
        let g = graph(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)], (0, 4));
        let bct = biconnected_components(&g).unwrap();
        let a = locate_agents(&g, &bct).unwrap();
        assert_eq!(agents(&a.blocks[0]), vec![(0, true), (2, false)]);
        assert_eq!(agents(&a.blocks[1]), vec![(2, false), (4, true)]);
        let p = connecting_path(&g, &bct, 0, NodeId(4)).unwrap().unwrap();
        assert_eq!(p.first(), Some(&NodeId(2)));
        assert_eq!(p.last(), Some(&NodeId(4)));
        assert_eq!(connecting_path(&g, &bct, 0, NodeId(0)).unwrap(), None);
    }

    #[test]
    fn cycle_agents_are_the_monitors() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], (1, 3));
        let bct = biconnected_components(&g).unwrap();
        let a = locate_agents(&g, &bct).unwrap();
        assert_eq!(agents(&a.blocks[0]), vec![(1, true), (3, true)]);
        assert_eq!(distinct_agent_count(&a, 0).unwrap(), 2);
    }

    #[test]
    fn path_agents() {
        // m1=0, a=1, b=2, m2=3
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)], (0, 3));
        let bct = biconnected_components(&g).unwrap();
        let a = locate_agents(&g, &bct).unwrap();
        let mid = bct.block_of_link(LinkId(1)).unwrap().id;
        assert_eq!(agents(&a.blocks[mid]), vec![(1, false), (2, false)]);
        for end in [LinkId(0), LinkId(2)] {
            let b = bct.block_of_link(end).unwrap().id;
            let real: Vec<bool> = a.blocks[b].agents.iter().map(|x| x.is_real_monitor).collect();
            assert_eq!(real.iter().filter(|&&r| r).count(), 1);
            assert_eq!(real.len(), 2);
        }
        assert_eq!(distinct_agent_count(&a, mid).unwrap(), 2);
        assert_eq!(distinct_agent_count(&a, 9), Err(Error::UnknownBlock(9)));
    }

    #[test]
    fn leaf_block_has_one_agent() {
        // trunk 0-1-2 with triangle 1-3-4 hanging off node 1
        let g = graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4), (1, 4)], (0, 2));
        let bct = biconnected_components(&g).unwrap();
        let a = locate_agents(&g, &bct).unwrap();
        let leaf = bct.block_of_link(LinkId(3)).unwrap().id;
        assert_eq!(agents(&a.blocks[leaf]), vec![(1, false)]);
        assert_eq!(distinct_agent_count(&a, leaf).unwrap(), 1);
    }

    #[test]
    fn monitors_required_and_json() {
        let g = graph(2, &[(0, 1)], (0, 1));
        let bct = biconnected_components(&g).unwrap();
        let a = locate_agents(&g, &bct).unwrap();
        assert_eq!(
            a.to_json().to_string(),
            r#"{"0":[{"is_real_monitor":true,"node":0},{"is_real_monitor":true,"node":1}]}"#
        );
        let bare = Graph::build([NodeId(0), NodeId(1)], &[(NodeId(0), NodeId(1))], None).unwrap();
        assert_eq!(locate_agents(&bare, &bct), Err(Error::MonitorsUnset));
    }
}
