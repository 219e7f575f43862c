//! Triconnected components of a biconnected block.
//!
//! The block is split recursively at multi-links and separation pairs until
//! every piece is a bond, a triangle or a 3-connected simple graph; bonds
//! sharing a virtual link are then merged, and so are polygons. The result is
//! the unique canonical decomposition. Split-pair search is quadratic per
//! level, which is plenty for graphs of a few dozen nodes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::connectivity::k_vertex_connected;
use crate::error::{Error, Result};
use crate::graph::{pair, Graph, LinkId, LinkKind, MultiGraph, MultiLink, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ComponentKind {
    Polygon,
    Bond,
    Rigid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub id: usize,
    pub kind: ComponentKind,
    pub graph: MultiGraph,
}

impl Component {
    pub fn real_links(&self) -> impl Iterator<Item = &MultiLink> {
        self.graph.real_links()
    }

    pub fn virtual_links(&self) -> impl Iterator<Item = &MultiLink> {
        self.graph.virtual_links()
    }

    pub fn node_count(&self) -> usize {
        self.graph.nodes.len()
    }

    pub fn is_triangle(&self) -> bool {
        self.kind == ComponentKind::Polygon && self.graph.links.len() == 3
    }

    /// Virtual link of this component joining `p`, if any.
    pub fn virtual_at(&self, p: (NodeId, NodeId)) -> Option<&MultiLink> {
        let p = pair(p.0, p.1);
        self.virtual_links().find(|l| l.ends == p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriconnectedDecomposition {
    pub components: Vec<Component>,
    /// Virtual link → the two components holding it (smaller id first).
    pub virtual_pairing: BTreeMap<LinkId, (usize, usize)>,
    /// Component → node pairs of its virtual links.
    pub split_pairs: BTreeMap<usize, Vec<(NodeId, NodeId)>>,
}

/// What lies directly across a virtual link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Neighborhood {
    pub direct: usize,
    /// Components reached through the pair; a bond is looked through.
    pub expanded: Vec<usize>,
    /// The real link on the pair held by a bond in between, if any.
    pub real_link: Option<LinkId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct WorkLink {
    id: LinkId,
    ends: (NodeId, NodeId),
    kind: LinkKind,
}

struct Splitter {
    next_virtual: u32,
    pieces: Vec<Vec<WorkLink>>,
}

impl Splitter {
    fn fresh(&mut self) -> LinkId {
        let id = LinkId(self.next_virtual);
        self.next_virtual += 1;
        id
    }

    fn split(&mut self, links: Vec<WorkLink>) {
        let nodes: BTreeSet<NodeId> = links.iter().flat_map(|l| [l.ends.0, l.ends.1]).collect();
        if nodes.len() <= 2 {
            self.pieces.push(links);
            return;
        }

        let mut by_pair: BTreeMap<(NodeId, NodeId), Vec<WorkLink>> = BTreeMap::new();
        for l in &links {
            by_pair.entry(l.ends).or_default().push(*l);
        }
        if let Some((&p, group)) = by_pair.iter().find(|(_, g)| g.len() >= 2) {
            let v = self.fresh();
            let mut bond = group.clone();
            let vl = WorkLink {
                id: v,
                ends: p,
                kind: LinkKind::Virtual,
            };
            bond.push(vl);
            let mut rest: Vec<WorkLink> = links.into_iter().filter(|l| l.ends != p).collect();
            rest.push(vl);
            self.pieces.push(bond);
            self.split(rest);
            return;
        }

        let order: Vec<NodeId> = nodes.iter().copied().collect();
        for (i, &u) in order.iter().enumerate() {
            for &w in &order[i + 1..] {
                if let Some((first, second)) = separation(&links, u, w) {
                    let v = self.fresh();
                    let vl = WorkLink {
                        id: v,
                        ends: (u, w),
                        kind: LinkKind::Virtual,
                    };
                    let mut a = first;
                    let mut b = second;
                    a.push(vl);
                    b.push(vl);
                    self.split(a);
                    self.split(b);
                    return;
                }
            }
        }
        self.pieces.push(links);
    }
}

/// Separation classes of `links` with respect to `{u, w}`; returns a split
/// into two link sets when the pair is a separation pair. Assumes no
/// parallel links.
fn separation(links: &[WorkLink], u: NodeId, w: NodeId) -> Option<(Vec<WorkLink>, Vec<WorkLink>)> {
    let n = links.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut at: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (i, l) in links.iter().enumerate() {
        for x in [l.ends.0, l.ends.1] {
            if x == u || x == w {
                continue;
            }
            match at.get(&x) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
                None => {
                    at.insert(x, i);
                }
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(i);
    }
    if classes.len() < 2 {
        return None;
    }
    let mut classes: Vec<Vec<usize>> = classes.into_values().collect();
    classes.sort();
    let singles = classes.iter().filter(|c| c.len() == 1).count();
    if classes.len() == 2 && singles > 0 {
        return None;
    }
    let pick = classes.iter().position(|c| c.len() >= 2)?;
    let chosen: BTreeSet<usize> = classes[pick].iter().copied().collect();
    let (a, b): (Vec<_>, Vec<_>) = (0..n).partition(|i| chosen.contains(i));
    Some((
        a.into_iter().map(|i| links[i]).collect(),
        b.into_iter().map(|i| links[i]).collect(),
    ))
}

fn kind_of(links: &[WorkLink]) -> ComponentKind {
    let mut deg: BTreeMap<NodeId, usize> = BTreeMap::new();
    for l in links {
        *deg.entry(l.ends.0).or_default() += 1;
        *deg.entry(l.ends.1).or_default() += 1;
    }
    if deg.len() == 2 {
        ComponentKind::Bond
    } else if deg.values().all(|&d| d == 2) {
        ComponentKind::Polygon
    } else {
        ComponentKind::Rigid
    }
}

fn merge_same_kind(mut comps: Vec<Vec<WorkLink>>) -> Vec<Vec<WorkLink>> {
    loop {
        let mut holder: BTreeMap<LinkId, Vec<usize>> = BTreeMap::new();
        for (i, c) in comps.iter().enumerate() {
            for l in c.iter().filter(|l| l.kind == LinkKind::Virtual) {
                holder.entry(l.id).or_default().push(i);
            }
        }
        let hit = holder.iter().find_map(|(&v, owners)| {
            let (a, b) = (owners[0], owners[1]);
            let (ka, kb) = (kind_of(&comps[a]), kind_of(&comps[b]));
            (ka == kb && ka != ComponentKind::Rigid).then_some((v, a, b))
        });
        let Some((v, a, b)) = hit else { return comps };
        let (lo, hi) = (a.min(b), a.max(b));
        let second = comps.remove(hi);
        let first = &mut comps[lo];
        first.retain(|l| l.id != v);
        first.extend(second.into_iter().filter(|l| l.id != v));
    }
}

/// Canonical Polygon/Bond/Rigid decomposition of a biconnected block.
pub fn triconnected_components(block: &Graph) -> Result<TriconnectedDecomposition> {
    if block.degree() < 3 {
        return Err(Error::TooSmall {
            nodes: block.degree(),
            k: 2,
        });
    }
    if !k_vertex_connected(block, 2)? {
        return Err(Error::NotBiconnected);
    }
    let links: Vec<WorkLink> = block
        .links()
        .iter()
        .map(|(&id, &ends)| WorkLink {
            id,
            ends,
            kind: LinkKind::Real,
        })
        .collect();
    let first_virtual = block.links().keys().next_back().map_or(0, |l| l.0 + 1);
    let mut s = Splitter {
        next_virtual: first_virtual,
        pieces: Vec::new(),
    };
    s.split(links);
    let mut comps = merge_same_kind(s.pieces);

    // canonical order: smallest real link, then the sorted link list
    let key = |c: &Vec<WorkLink>| {
        let min_real = c
            .iter()
            .filter(|l| l.kind == LinkKind::Real)
            .map(|l| l.id)
            .min();
        let mut ends: Vec<(NodeId, NodeId)> = c.iter().map(|l| l.ends).collect();
        ends.sort();
        (min_real.is_none(), min_real, ends)
    };
    comps.sort_by_key(key);

    // renumber virtual links in order of first appearance
    let mut renumber: BTreeMap<LinkId, LinkId> = BTreeMap::new();
    let mut next = first_virtual;
    for c in comps.iter_mut() {
        c.sort_by_key(|l| (l.kind, l.ends, l.id));
        for l in c.iter() {
            if l.kind == LinkKind::Virtual && !renumber.contains_key(&l.id) {
                renumber.insert(l.id, LinkId(next));
                next += 1;
            }
        }
    }

    let mut components = Vec::with_capacity(comps.len());
    let mut holders: BTreeMap<LinkId, Vec<usize>> = BTreeMap::new();
    let mut split_pairs = BTreeMap::new();
    for (id, c) in comps.into_iter().enumerate() {
        let kind = kind_of(&c);
        let mut graph = MultiGraph::default();
        let mut pairs = Vec::new();
        for l in c {
            let lid = match l.kind {
                LinkKind::Real => l.id,
                LinkKind::Virtual => {
                    let nid = renumber[&l.id];
                    holders.entry(nid).or_default().push(id);
                    pairs.push(l.ends);
                    nid
                }
            };
            graph.add_link(lid, l.ends.0, l.ends.1, l.kind);
        }
        split_pairs.insert(id, pairs);
        components.push(Component { id, kind, graph });
    }
    let virtual_pairing = holders
        .into_iter()
        .map(|(v, h)| (v, (h[0].min(h[1]), h[0].max(h[1]))))
        .collect();
    Ok(TriconnectedDecomposition {
        components,
        virtual_pairing,
        split_pairs,
    })
}

impl TriconnectedDecomposition {
    pub fn component(&self, id: usize) -> &Component {
        &self.components[id]
    }

    /// Component on the other side of virtual link `v` from `from`.
    pub fn across(&self, from: usize, v: LinkId) -> Option<usize> {
        let &(a, b) = self.virtual_pairing.get(&v)?;
        if a == from {
            Some(b)
        } else if b == from {
            Some(a)
        } else {
            None
        }
    }

    /// All components reachable across `v` without coming back through `from`.
    pub fn far_components(&self, from: usize, v: LinkId) -> Vec<usize> {
        let Some(start) = self.across(from, v) else {
            return Vec::new();
        };
        let mut seen = BTreeSet::from([from, start]);
        let mut out = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for l in self.components[c].virtual_links() {
                if let Some(d) = self.across(c, l.id) {
                    if seen.insert(d) {
                        out.push(d);
                        queue.push_back(d);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Nodes lying across `v` as seen from `from`, the pair itself included.
    pub fn far_nodes(&self, from: usize, v: LinkId) -> BTreeSet<NodeId> {
        self.far_components(from, v)
            .into_iter()
            .flat_map(|c| self.components[c].graph.nodes.iter().copied())
            .collect()
    }

    /// Real links lying across `v` as seen from `from`.
    pub fn far_real_links(&self, from: usize, v: LinkId) -> BTreeSet<LinkId> {
        self.far_components(from, v)
            .into_iter()
            .flat_map(|c| self.components[c].real_links().map(|l| l.id))
            .collect()
    }

    /// Components attached to `comp` at `split_pair`, looking through a bond.
    pub fn neighboring_components(
        &self,
        comp: usize,
        split_pair: (NodeId, NodeId),
    ) -> Result<Neighborhood> {
        let c = &self.components[comp];
        let v = c
            .virtual_at(split_pair)
            .ok_or(Error::UnknownPair(split_pair.0, split_pair.1))?;
        let direct = self.across(comp, v.id).ok_or(Error::BrokenPairing(v.id))?;
        let d = &self.components[direct];
        if d.kind != ComponentKind::Bond {
            return Ok(Neighborhood {
                direct,
                expanded: vec![direct],
                real_link: None,
            });
        }
        let mut expanded: Vec<usize> = d
            .virtual_links()
            .filter(|l| l.id != v.id)
            .filter_map(|l| self.across(direct, l.id))
            .collect();
        expanded.sort();
        Ok(Neighborhood {
            direct,
            expanded,
            real_link: d.real_links().next().map(|l| l.id),
        })
    }
}

/// Merges the components back along their virtual links and drops the
/// virtual links.
pub fn reassemble(d: &TriconnectedDecomposition) -> Result<Graph> {
    let mut seen: BTreeMap<LinkId, Vec<(usize, (NodeId, NodeId))>> = BTreeMap::new();
    let mut nodes = BTreeSet::new();
    let mut real = Vec::new();
    for c in &d.components {
        nodes.extend(c.graph.nodes.iter().copied());
        for l in &c.graph.links {
            match l.kind {
                LinkKind::Real => real.push((l.id, l.ends)),
                LinkKind::Virtual => seen.entry(l.id).or_default().push((c.id, l.ends)),
            }
        }
    }
    for (v, holders) in &seen {
        let ok = holders.len() == 2
            && holders[0].0 != holders[1].0
            && holders[0].1 == holders[1].1
            && d.virtual_pairing.get(v) == Some(&(holders[0].0.min(holders[1].0), holders[0].0.max(holders[1].0)));
        if !ok {
            return Err(Error::BrokenPairing(*v));
        }
    }
    if let Some(v) = d.virtual_pairing.keys().find(|v| !seen.contains_key(v)) {
        return Err(Error::BrokenPairing(*v));
    }
    Graph::from_links(nodes, real, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: u32, edges: &[(u32, u32)]) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        Graph::build((0..n).map(NodeId), &e, None).unwrap()
    }

    fn kinds(d: &TriconnectedDecomposition) -> Vec<ComponentKind> {
        let mut k: Vec<_> = d.components.iter().map(|c| c.kind).collect();
        k.sort();
        k
    }

    #[test]
    fn k4_is_one_rigid() {
        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let d = triconnected_components(&k4).unwrap();
        assert_eq!(kinds(&d), vec![ComponentKind::Rigid]);
        assert!(d.virtual_pairing.is_empty());
        assert_eq!(reassemble(&d).unwrap(), k4);
    }

    #[test]
    fn cycle_is_one_polygon() {
        let c5 = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let d = triconnected_components(&c5).unwrap();
        assert_eq!(kinds(&d), vec![ComponentKind::Polygon]);
        assert!(d.virtual_pairing.is_empty());
        assert_eq!(reassemble(&d).unwrap(), c5);
    }

    // u=0, v=1, x=2, y=3; links uv, ux, xv, uy, yv
    fn two_triangles_on_an_edge() -> Graph {
        graph(4, &[(0, 1), (0, 2), (2, 1), (0, 3), (3, 1)])
    }

    #[test]
    fn two_triangles_glued_on_a_real_edge() {
        let g = two_triangles_on_an_edge();
        let d = triconnected_components(&g).unwrap();
        assert_eq!(
            kinds(&d),
            vec![ComponentKind::Polygon, ComponentKind::Polygon, ComponentKind::Bond]
        );
        let bond = d.components.iter().find(|c| c.kind == ComponentKind::Bond).unwrap();
        assert_eq!(bond.real_links().map(|l| l.id).collect::<Vec<_>>(), vec![LinkId(0)]);
        assert_eq!(bond.virtual_links().count(), 2);
        for c in d.components.iter().filter(|c| c.kind == ComponentKind::Polygon) {
            assert_eq!(c.virtual_links().count(), 1);
            assert_eq!(c.virtual_links().next().unwrap().ends, (NodeId(0), NodeId(1)));
            assert_eq!(c.real_links().count(), 2);
        }
        assert_eq!(d.virtual_pairing.len(), 2);
        assert_eq!(reassemble(&d).unwrap(), g);
    }

    #[test]
    fn neighborhoods_look_through_bonds() {
        let d = triconnected_components(&two_triangles_on_an_edge()).unwrap();
        // component 0 holds real link 0 (the bond); polygon u-x-v holds link 1
        let pux = d
            .components
            .iter()
            .find(|c| c.real_links().any(|l| l.id == LinkId(1)))
            .unwrap();
        let nb = d.neighboring_components(pux.id, (NodeId(1), NodeId(0))).unwrap();
        assert_eq!(d.component(nb.direct).kind, ComponentKind::Bond);
        assert_eq!(nb.real_link, Some(LinkId(0)));
        assert_eq!(nb.expanded.len(), 1);
        let other = d.component(nb.expanded[0]);
        assert!(other.real_links().any(|l| l.id == LinkId(3)));

        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let d = triconnected_components(&k4).unwrap();
        assert_eq!(
            d.neighboring_components(0, (NodeId(0), NodeId(1))),
            Err(Error::UnknownPair(NodeId(0), NodeId(1)))
        );
    }

    #[test]
    fn wheel_split_at_hub_spoke() {
        // W5: hub 0, rim 1-2-3-4-5; rim is a cycle, so the wheel is 3-connected
        let w = graph(
            6,
            &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5), (5, 1)],
        );
        let d = triconnected_components(&w).unwrap();
        assert_eq!(kinds(&d), vec![ComponentKind::Rigid]);
        // without spoke 0-3 the rim node 3 has degree 2
        let w2 = graph(6, &[(0, 1), (0, 2), (0, 4), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]);
        let d = triconnected_components(&w2).unwrap();
        // triangle 2-3-4 hangs on pair {2,4}; the rest (0,1,2,4,5 + virtual 2-4) is rigid
        assert_eq!(kinds(&d), vec![ComponentKind::Polygon, ComponentKind::Rigid]);
        let poly = d.components.iter().find(|c| c.kind == ComponentKind::Polygon).unwrap();
        assert_eq!(poly.graph.nodes, BTreeSet::from([NodeId(2), NodeId(3), NodeId(4)]));
        let nb = d.neighboring_components(poly.id, (NodeId(2), NodeId(4))).unwrap();
        assert_eq!(d.component(nb.direct).kind, ComponentKind::Rigid);
        assert_eq!(reassemble(&d).unwrap(), w2);
    }

    #[test]
    fn rejects_bad_blocks() {
        assert!(matches!(
            triconnected_components(&graph(2, &[(0, 1)])),
            Err(Error::TooSmall { .. })
        ));
        assert_eq!(
            triconnected_components(&graph(3, &[(0, 1), (1, 2)])),
            Err(Error::NotBiconnected)
        );
    }

    #[test]
    fn broken_pairing_is_reported() {
        let mut d = triconnected_components(&two_triangles_on_an_edge()).unwrap();
        let c = d.components.iter_mut().find(|c| c.kind == ComponentKind::Polygon).unwrap();
        c.graph.links.retain(|l| l.kind == LinkKind::Real);
        assert!(matches!(reassemble(&d), Err(Error::BrokenPairing(_))));
    }
}
