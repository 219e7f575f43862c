//! Connectivity predicates by exhaustive deletion. Inputs are desk-scale, so
//! every (k-1)-subset of nodes or links is tried and followed by a BFS.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, LinkId, LinkKind, MultiGraph, NodeId, Topology};

/// Index-based copy of a topology used by the deletion searches.
struct Compact {
    n: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl Compact {
    fn new<T: Topology + ?Sized>(g: &T) -> Self {
        let ids = g.node_ids();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges: Vec<(usize, usize)> = g
            .link_ends()
            .into_iter()
            .map(|(u, v)| (index[&u], index[&v]))
            .collect();
        let mut incident = vec![Vec::new(); ids.len()];
        for (i, &(u, v)) in edges.iter().enumerate() {
            incident[u].push(i);
            if v != u {
                incident[v].push(i);
            }
        }
        Self {
            n: ids.len(),
            edges,
            incident,
        }
    }

    fn connected_without(&self, dead_nodes: &[usize], dead_edges: &[usize]) -> bool {
        let mut alive = vec![true; self.n];
        for &v in dead_nodes {
            alive[v] = false;
        }
        let remaining = alive.iter().filter(|&&a| a).count();
        let Some(start) = alive.iter().position(|&a| a) else {
            return true;
        };
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &e in &self.incident[u] {
                if dead_edges.contains(&e) {
                    continue;
                }
                let (a, b) = self.edges[e];
                let w = if a == u { b } else { a };
                if alive[w] && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == remaining
    }
}

/// Every node reaches every other. Empty and single-node graphs count as connected.
pub fn is_connected<T: Topology + ?Sized>(g: &T) -> bool {
    Compact::new(g).connected_without(&[], &[])
}

fn check_order(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(k))
    }
}

/// No deletion of `k - 1` nodes disconnects `g`. Requires `|g| > k`.
pub fn k_vertex_connected<T: Topology + ?Sized>(g: &T, k: usize) -> Result<bool> {
    check_order(k)?;
    let c = Compact::new(g);
    if c.n <= k {
        return Err(Error::TooSmall { nodes: c.n, k });
    }
    Ok(match k {
        1 => c.connected_without(&[], &[]),
        2 => (0..c.n).all(|v| c.connected_without(&[v], &[])),
        _ => (0..c.n).all(|u| (u + 1..c.n).all(|v| c.connected_without(&[u, v], &[]))),
    })
}

/// No deletion of `k - 1` links disconnects `g`. Parallel links count separately.
pub fn k_edge_connected<T: Topology + ?Sized>(g: &T, k: usize) -> Result<bool> {
    check_order(k)?;
    let c = Compact::new(g);
    let m = c.edges.len();
    Ok(match k {
        1 => c.connected_without(&[], &[]),
        2 => c.connected_without(&[], &[]) && (0..m).all(|e| c.connected_without(&[], &[e])),
        _ => {
            c.connected_without(&[], &[])
                && (0..m).all(|e| {
                    c.connected_without(&[], &[e])
                        && (e + 1..m).all(|f| c.connected_without(&[], &[e, f]))
                })
        }
    })
}

/// `g` plus one virtual link between the monitors, parallel to any existing link.
pub fn augment_with_monitor_link(g: &Graph) -> Result<MultiGraph> {
    let (m1, m2) = g.require_monitors()?;
    let mut mg = MultiGraph::from_graph(g);
    let id = mg.max_link_id().map_or(LinkId(0), |l| LinkId(l.0 + 1));
    mg.add_link(id, m1, m2, LinkKind::Virtual);
    Ok(mg)
}

/// The augmented graph (monitor link added) is both 3-edge- and
/// 3-vertex-connected. Graphs with at most three nodes are never 3-connected.
pub fn augmented_three_connected(g: &Graph) -> Result<bool> {
    let aug = augment_with_monitor_link(g)?;
    if aug.nodes.len() <= 3 {
        return Ok(false);
    }
    Ok(k_edge_connected(&aug, 3)? && k_vertex_connected(&aug, 3)?)
}

/// Structural test for "every interior link is identifiable".
///
/// The graph is first reduced: nodes adjacent to nothing but monitors carry
/// only exterior links and are dropped, as is a direct monitor–monitor link
/// (it forms a measurement path on its own). A graph without interior links
/// passes vacuously. Otherwise, with `H` the reduced graph and `H+` the
/// reduced graph plus one virtual monitor link:
///
/// 1. deleting any two links of `H`, unless both touch the same monitor,
///    leaves `H` connected;
/// 2. deleting any two nodes of `H+`, unless they are the two monitors,
///    leaves `H+` connected.
///
/// Plain 3-connectivity of `H+` is not enough: in the triangular prism with
/// the monitors on opposite triangles, the two rungs away from the monitors
/// form a 2-link cut that the virtual link hides, and both are unidentifiable.
pub fn interior_identifiability_predicate(g: &Graph) -> Result<bool> {
    let (m1, m2) = g.require_monitors()?;
    let is_mon = |v: NodeId| v == m1 || v == m2;
    let interior = g
        .links()
        .values()
        .any(|&(u, v)| !is_mon(u) && !is_mon(v));
    if !interior {
        return Ok(true);
    }
    let keep: BTreeSet<NodeId> = g
        .nodes()
        .iter()
        .copied()
        .filter(|&v| is_mon(v) || g.neighbors(v).iter().any(|&(w, _)| !is_mon(w)))
        .collect();
    let links: Vec<_> = g
        .links()
        .iter()
        .filter(|(_, (u, v))| keep.contains(u) && keep.contains(v) && !(is_mon(*u) && is_mon(*v)))
        .map(|(&l, &e)| (l, e))
        .collect();
    let reduced = Graph::from_links(keep, links, Some((m1, m2)))?;

    let h = Compact::new(&reduced);
    let at = |e: usize, m: usize| h.edges[e].0 == m || h.edges[e].1 == m;
    let index = |v: NodeId| reduced.nodes().iter().position(|&w| w == v).expect("monitor kept");
    let (i1, i2) = (index(m1), index(m2));
    let m = h.edges.len();
    if !h.connected_without(&[], &[]) {
        return Ok(false);
    }
    for e in 0..m {
        if !h.connected_without(&[], &[e]) {
            return Ok(false);
        }
        for f in e + 1..m {
            let same_monitor = (at(e, i1) && at(f, i1)) || (at(e, i2) && at(f, i2));
            if !same_monitor && !h.connected_without(&[], &[e, f]) {
                return Ok(false);
            }
        }
    }

    let aug = Compact::new(&augment_with_monitor_link(&reduced)?);
    for u in 0..aug.n {
        for v in u..aug.n {
            let monitors = (u == i1 && v == i2) || (u == i2 && v == i1);
            if !monitors && !aug.connected_without(&[u, v], &[]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: u32, edges: &[(u32, u32)], mon: Option<(u32, u32)>) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        Graph::build((0..n).map(NodeId), &e, mon.map(|(a, b)| (NodeId(a), NodeId(b)))).unwrap()
    }

    fn k4(mon: Option<(u32, u32)>) -> Graph {
        graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], mon)
    }

    fn cycle(n: u32, mon: Option<(u32, u32)>) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        graph(n, &e, mon)
    }

    #[test]
    fn connected_examples() {
        assert!(is_connected(&cycle(3, None)));
        assert!(!is_connected(&graph(4, &[(0, 1), (2, 3)], None)));
        // path 0-1-2 with node 1 removed
        assert!(!is_connected(&graph(3, &[], None)));
        assert!(is_connected(&graph(0, &[], None)));
        assert!(is_connected(&graph(1, &[], None)));
    }

    #[test]
    fn vertex_connectivity_examples() {
        assert!(k_vertex_connected(&k4(None), 3).unwrap());
        assert!(!k_vertex_connected(&cycle(5, None), 3).unwrap());
        assert!(k_vertex_connected(&cycle(5, None), 2).unwrap());
        let pendant = graph(4, &[(0, 1), (1, 2), (0, 2), (2, 3)], None);
        assert!(!k_vertex_connected(&pendant, 2).unwrap());
        assert_eq!(
            k_vertex_connected(&cycle(3, None), 3),
            Err(Error::TooSmall { nodes: 3, k: 3 })
        );
        assert_eq!(k_vertex_connected(&k4(None), 4), Err(Error::UnsupportedOrder(4)));
    }

    #[test]
    fn edge_connectivity_examples() {
        assert!(k_edge_connected(&k4(None), 3).unwrap());
        assert!(k_edge_connected(&cycle(5, None), 2).unwrap());
        assert!(!k_edge_connected(&cycle(5, None), 3).unwrap());
        assert!(!k_edge_connected(&graph(3, &[(0, 1), (1, 2)], None), 2).unwrap());
    }

    #[test]
    fn augmentation_examples() {
        let path = graph(3, &[(0, 1), (1, 2)], Some((0, 2)));
        let aug = augment_with_monitor_link(&path).unwrap();
        assert_eq!(aug.links.len(), 3);
        assert_eq!(aug.nodes.len(), 3);
        assert_eq!(aug.virtual_links().count(), 1);

        let single = graph(2, &[(0, 1)], Some((0, 1)));
        let aug = augment_with_monitor_link(&single).unwrap();
        assert_eq!(aug.real_links().count(), 1);
        assert_eq!(aug.virtual_links().next().unwrap().ends, (NodeId(0), NodeId(1)));

        let c4 = cycle(4, Some((0, 1)));
        let aug = augment_with_monitor_link(&c4).unwrap();
        assert_eq!(aug.links.len(), 5);
        assert!(k_edge_connected(&aug, 2).unwrap() && !k_edge_connected(&aug, 3).unwrap());

        assert_eq!(
            augment_with_monitor_link(&cycle(4, None)),
            Err(Error::MonitorsUnset)
        );
    }

    #[test]
    fn interior_predicate_examples() {
        for (a, b) in [(0, 1), (0, 3), (2, 3)] {
            assert!(interior_identifiability_predicate(&k4(Some((a, b)))).unwrap());
        }
        assert!(!interior_identifiability_predicate(&graph(4, &[(0, 1), (1, 2), (2, 3)], Some((0, 3)))).unwrap());
        assert!(!interior_identifiability_predicate(&cycle(5, Some((0, 1)))).unwrap());
        // m1-v-m2: the raw augmented test fails, but there is no interior link
        let short = graph(3, &[(0, 1), (1, 2)], Some((0, 2)));
        assert!(!augmented_three_connected(&short).unwrap());
        assert!(interior_identifiability_predicate(&short).unwrap());
        // K_{2,3} on monitors {0,1} plus interior link 2-3: node 4 only touches monitors
        let fan = graph(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3)], Some((0, 1)));
        assert!(!augmented_three_connected(&fan).unwrap());
        assert!(interior_identifiability_predicate(&fan).unwrap());
        // prism minus the rung 0-5, monitors 0 and 5: augmented graph is the
        // 3-connected prism, yet rungs 1-4 and 2-3 form a 2-link cut
        let prism = graph(6, &[(0, 3), (0, 4), (3, 4), (1, 2), (1, 5), (2, 5), (1, 4), (2, 3)], Some((0, 5)));
        assert!(augmented_three_connected(&prism).unwrap());
        assert!(!interior_identifiability_predicate(&prism).unwrap());
        // monitors 0 and 1 each joined to 2, 3, 4, 5 plus links 2-5 and 3-4:
        // removing both monitors splits 2-5 from 3-4, which is allowed
        let double_fan = graph(
            6,
            &[(0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5), (2, 5), (3, 4)],
            Some((0, 1)),
        );
        assert!(interior_identifiability_predicate(&double_fan).unwrap());
        assert_eq!(
            interior_identifiability_predicate(&cycle(5, None)),
            Err(Error::MonitorsUnset)
        );
    }
}
