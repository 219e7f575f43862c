//! Unit-capacity max-flow: disjoint paths and local connectivities.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{NodeId, Topology};

struct Flow {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl Flow {
    fn new(n: usize) -> Self {
        Self {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn arc(&mut self, u: usize, v: usize, c: i64) {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        let mut total = 0;
        while total < limit {
            let mut prev = vec![usize::MAX; self.head.len()];
            let mut seen = vec![false; self.head.len()];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &a in &self.head[u] {
                    let v = self.to[a];
                    if self.cap[a] > 0 && !seen[v] {
                        seen[v] = true;
                        prev[v] = a;
                        q.push_back(v);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            let mut v = t;
            while v != s {
                let a = prev[v];
                self.cap[a] -= 1;
                self.cap[a ^ 1] += 1;
                v = self.to[a ^ 1];
            }
            total += 1;
        }
        total
    }
}

const BIG: i64 = 1 << 30;

/// Maximum family of vertex-disjoint paths from `sources` to `targets`,
/// avoiding the nodes in `avoid`. Each path starts in `sources`, ends in
/// `targets`, and touches no other source or target.
pub fn disjoint_paths<T: Topology + ?Sized>(
    g: &T,
    sources: &[NodeId],
    targets: &[NodeId],
    avoid: &BTreeSet<NodeId>,
) -> Vec<Vec<NodeId>> {
    let ids: Vec<NodeId> = g.node_ids();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ids.len();
    // node i splits into in = 2i, out = 2i + 1
    let (s, t) = (2 * n, 2 * n + 1);
    let mut f = Flow::new(2 * n + 2);
    for (i, v) in ids.iter().enumerate() {
        let c = if avoid.contains(v) { 0 } else { 1 };
        f.arc(2 * i, 2 * i + 1, c);
    }
    for (u, v) in g.link_ends() {
        let (a, b) = (index[&u], index[&v]);
        f.arc(2 * a + 1, 2 * b, 1);
        f.arc(2 * b + 1, 2 * a, 1);
    }
    for v in sources {
        if let Some(&i) = index.get(v) {
            f.arc(s, 2 * i, 1);
        }
    }
    for v in targets {
        if let Some(&i) = index.get(v) {
            f.arc(2 * i + 1, t, 1);
        }
    }
    let k = f.max_flow(s, t, BIG);
    // decompose the flow by walking saturated forward arcs
    let mut used = vec![false; f.to.len()];
    let mut paths = Vec::new();
    for _ in 0..k {
        let mut path = Vec::new();
        let mut u = s;
        while u != t {
            let next = f.head[u]
                .iter()
                .copied()
                .find(|&a| a % 2 == 0 && !used[a] && carries_flow(&f, a));
            let Some(a) = next else { break };
            used[a] = true;
            u = f.to[a];
            if u < 2 * n && u % 2 == 0 {
                path.push(ids[u / 2]);
            }
        }
        if !path.is_empty() {
            paths.push(path);
        }
    }
    paths
}

// A forward arc carries flow when its residual twin has capacity.
fn carries_flow(f: &Flow, a: usize) -> bool {
    f.cap[a ^ 1] > 0
}

/// Number of internally vertex-disjoint `s`–`t` paths; each parallel link
/// joining `s` and `t` counts as its own path.
pub fn local_vertex_connectivity<T: Topology + ?Sized>(g: &T, s: NodeId, t: NodeId) -> usize {
    let ids: Vec<NodeId> = g.node_ids();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ids.len();
    let (si, ti) = (index[&s], index[&t]);
    let mut f = Flow::new(2 * n);
    for i in 0..n {
        let c = if i == si || i == ti { BIG } else { 1 };
        f.arc(2 * i, 2 * i + 1, c);
    }
    for (u, v) in g.link_ends() {
        let (a, b) = (index[&u], index[&v]);
        f.arc(2 * a + 1, 2 * b, 1);
        f.arc(2 * b + 1, 2 * a, 1);
    }
    f.max_flow(2 * si + 1, 2 * ti, BIG) as usize
}

/// Number of link-disjoint `s`–`t` paths.
pub fn local_edge_connectivity<T: Topology + ?Sized>(g: &T, s: NodeId, t: NodeId) -> usize {
    let ids: Vec<NodeId> = g.node_ids();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut f = Flow::new(ids.len());
    for (u, v) in g.link_ends() {
        let (a, b) = (index[&u], index[&v]);
        f.arc(a, b, 1);
        f.arc(b, a, 1);
    }
    f.max_flow(index[&s], index[&t], BIG) as usize
}
