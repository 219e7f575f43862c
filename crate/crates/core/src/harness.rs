//! Graph generators, small-graph enumeration, and the structural-vs-oracle
//! differ.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::connectivity::{is_connected, k_vertex_connected};
use crate::dil2m::{run_dil2m_with, Rule, Verdict};
use crate::error::{Error, Result};
use crate::graph::{Graph, LinkId, NodeId};
use crate::oracle::{identifiable_links_bruteforce, OracleConfig};

const RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    ErdosRenyi { p: f64 },
    RandomBiconnected { chords: usize },
    Barbell { left: usize, right: usize },
    Grid { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorPolicy {
    AllPairs,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub generator: Generator,
    pub nodes: usize,
    pub instances: usize,
    pub seed: u64,
    pub monitors: MonitorPolicy,
    pub path_cap: usize,
    pub allow_monitor_transit: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            generator: Generator::ErdosRenyi { p: 0.5 },
            nodes: 8,
            instances: 100,
            seed: 0,
            monitors: MonitorPolicy::Sampled,
            path_cap: crate::oracle::DEFAULT_PATH_CAP,
            allow_monitor_transit: false,
        }
    }
}

impl SweepConfig {
    pub fn oracle(&self) -> OracleConfig {
        OracleConfig {
            path_cap: self.path_cap,
            allow_monitor_transit: self.allow_monitor_transit,
        }
    }
}

/// Random stream for instance `index` of a seeded sweep.
pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn from_edges(n: usize, edges: &[(u32, u32)]) -> Graph {
    let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
    Graph::build((0..n as u32).map(NodeId), &e, None).expect("generated edges are simple")
}

pub fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Result<Graph> {
    for _ in 0..RETRIES {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = from_edges(n, &edges);
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed(RETRIES))
}

/// A cycle grown by random ears until it has `n` nodes, plus `chords`
/// extra links where room is left.
pub fn random_biconnected(n: usize, chords: usize, rng: &mut impl Rng) -> Result<Graph> {
    if n < 3 {
        return Err(Error::TooSmall { nodes: n, k: 2 });
    }
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let add = |e: &mut BTreeSet<(u32, u32)>, a: u32, b: u32| e.insert((a.min(b), a.max(b)));
    let first = rng.gen_range(3..=n);
    for i in 0..first as u32 {
        add(&mut edges, i, (i + 1) % first as u32);
    }
    let mut next = first as u32;
    while (next as usize) < n {
        let len = rng.gen_range(1..=n - next as usize);
        let a = rng.gen_range(0..next);
        let mut b = rng.gen_range(0..next - 1);
        if b >= a {
            b += 1;
        }
        let mut prev = a;
        for _ in 0..len {
            add(&mut edges, prev, next);
            prev = next;
            next += 1;
        }
        add(&mut edges, prev, b);
    }
    let mut missing: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
        .filter(|e| !edges.contains(e))
        .collect();
    missing.shuffle(rng);
    edges.extend(missing.into_iter().take(chords));
    let g = from_edges(n, &edges.into_iter().collect::<Vec<_>>());
    debug_assert!(k_vertex_connected(&g, 2).unwrap_or(false));
    Ok(g)
}

/// Two cliques joined by one link between their first nodes.
pub fn barbell(left: usize, right: usize) -> Graph {
    let mut edges = Vec::new();
    for (off, k) in [(0, left), (left, right)] {
        for u in 0..k {
            for v in u + 1..k {
                edges.push(((off + u) as u32, (off + v) as u32));
            }
        }
    }
    edges.push((0, left as u32));
    from_edges(left + right, &edges)
}

pub fn grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    from_edges(rows * cols, &edges)
}

/// Graph number `index` of a sweep, monitors placed on a random pair.
pub fn generate_graph(config: &SweepConfig, index: usize) -> Result<Graph> {
    let mut rng = instance_rng(config.seed, index);
    let g = match config.generator {
        Generator::ErdosRenyi { p } => erdos_renyi(config.nodes, p, &mut rng)?,
        Generator::RandomBiconnected { chords } => random_biconnected(config.nodes, chords, &mut rng)?,
        Generator::Barbell { left, right } => barbell(left, right),
        Generator::Grid { rows, cols } => grid(rows, cols),
    };
    let n = g.degree() as u32;
    if n < 2 {
        return Err(Error::GenerationFailed(0));
    }
    let m1 = rng.gen_range(0..n);
    let mut m2 = rng.gen_range(0..n - 1);
    if m2 >= m1 {
        m2 += 1;
    }
    g.with_monitors(NodeId(m1), NodeId(m2))
}

fn edge_slots(n: usize) -> Vec<(u32, u32)> {
    (0..n as u32).flat_map(|u| (u + 1..n as u32).map(move |v| (u, v))).collect()
}

/// Every connected simple graph on nodes `0..n`, labeled.
pub fn enumerate_labeled_connected(n: usize) -> Result<Vec<Graph>> {
    if n > 6 {
        return Err(Error::TooLarge { n, max: 6 });
    }
    let slots = edge_slots(n);
    let mut out = Vec::new();
    for mask in 0u32..1 << slots.len() {
        let edges: Vec<_> = (0..slots.len()).filter(|i| mask >> i & 1 == 1).map(|i| slots[i]).collect();
        let g = from_edges(n, &edges);
        if is_connected(&g) {
            out.push(g);
        }
    }
    Ok(out)
}

// Canonical adjacency bits: the smallest over orderings that list nodes by
// degree, high degree first.
fn canonical(n: usize, adj: &[u32]) -> u64 {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].count_ones()));
    let degs: Vec<u32> = order.iter().map(|&v| adj[v].count_ones()).collect();
    let mut best = u64::MAX;
    let mut perm = order.clone();
    permute_cells(n, adj, &degs, 0, &mut perm, &mut best);
    best
}

fn permute_cells(n: usize, adj: &[u32], degs: &[u32], start: usize, perm: &mut Vec<usize>, best: &mut u64) {
    if start == n {
        let mut bits = 0u64;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if adj[perm[i]] >> perm[j] & 1 == 1 {
                    bits |= 1 << k;
                }
                k += 1;
            }
        }
        *best = (*best).min(bits);
        return;
    }
    let end = (start..n).find(|&i| degs[i] != degs[start]).unwrap_or(n);
    heap_cells(n, adj, degs, start, end, end - start, perm, best);
}

#[allow(clippy::too_many_arguments)]
fn heap_cells(
    n: usize,
    adj: &[u32],
    degs: &[u32],
    start: usize,
    end: usize,
    k: usize,
    perm: &mut Vec<usize>,
    best: &mut u64,
) {
    if k <= 1 {
        permute_cells(n, adj, degs, end, perm, best);
        return;
    }
    heap_cells(n, adj, degs, start, end, k - 1, perm, best);
    for i in 0..k - 1 {
        let j = if k % 2 == 0 { start + i } else { start };
        perm.swap(j, start + k - 1);
        heap_cells(n, adj, degs, start, end, k - 1, perm, best);
    }
}

fn adjacency_of(bits: u64, n: usize) -> Vec<u32> {
    let mut adj = vec![0u32; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if bits >> k & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
            k += 1;
        }
    }
    adj
}

/// Every simple graph on `n ≤ 7` nodes up to isomorphism, connected or not,
/// as canonical adjacency bits.
fn all_graphs_up_to_iso(n: usize) -> BTreeSet<u64> {
    if n <= 1 {
        return BTreeSet::from([0]);
    }
    let mut out = BTreeSet::new();
    for small in all_graphs_up_to_iso(n - 1) {
        let base = adjacency_of(small, n - 1);
        for nb in 0u32..1 << (n - 1) {
            let mut adj = base.clone();
            adj.push(nb);
            for (v, a) in adj.iter_mut().enumerate().take(n - 1) {
                if nb >> v & 1 == 1 {
                    *a |= 1 << (n - 1);
                }
            }
            out.insert(canonical(n, &adj));
        }
    }
    out
}

/// Connected simple graphs on `n` nodes, one per isomorphism class.
pub fn enumerate_connected_up_to_iso(n: usize) -> Result<Vec<Graph>> {
    if n > 7 {
        return Err(Error::TooLarge { n, max: 7 });
    }
    Ok(all_graphs_up_to_iso(n)
        .into_iter()
        .map(|bits| {
            let adj = adjacency_of(bits, n);
            let edges: Vec<(u32, u32)> = (0..n as u32)
                .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
                .filter(|&(u, v)| adj[u as usize] >> v & 1 == 1)
                .collect();
            from_edges(n, &edges)
        })
        .filter(is_connected)
        .collect())
}

/// Labeled enumeration up to six nodes, isomorph-reduced at seven.
pub fn enumerate_all_connected_graphs(n: usize) -> Result<Vec<Graph>> {
    match n {
        0..=6 => enumerate_labeled_connected(n),
        7 => enumerate_connected_up_to_iso(7),
        _ => Err(Error::TooLarge { n, max: 7 }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkDiff {
    pub link: LinkId,
    pub ends: (NodeId, NodeId),
    pub structural: Verdict,
    pub oracle: Verdict,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffRecord {
    pub index: usize,
    pub fingerprint: Vec<(NodeId, NodeId)>,
    pub monitors: (NodeId, NodeId),
    pub links: Vec<LinkDiff>,
    pub categories: Vec<&'static str>,
    pub mismatch: bool,
}

/// Both engines on one instance.
pub fn diff_instance(g: &Graph, index: usize, config: &OracleConfig) -> Result<DiffRecord> {
    let monitors = g.require_monitors()?;
    let truth = identifiable_links_bruteforce(g, config)?.identifiable;
    let report = run_dil2m_with(g, Some(&truth), config)?;
    let links: Vec<LinkDiff> = report
        .links
        .iter()
        .map(|v| LinkDiff {
            link: v.link,
            ends: v.ends,
            structural: v.verdict,
            oracle: if truth.contains(&v.link) {
                Verdict::Identifiable
            } else {
                Verdict::Unidentifiable
            },
            rule: v.rule,
        })
        .collect();
    let mismatch = links
        .iter()
        .any(|d| d.rule != Rule::OracleFallback && d.structural != d.oracle);
    Ok(DiffRecord {
        index,
        fingerprint: g.fingerprint(),
        monitors,
        links,
        categories: report.components.iter().map(|c| c.category.name()).collect(),
        mismatch,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub instances: usize,
    pub links: usize,
    pub mismatched_instances: usize,
    pub mismatched_links: usize,
    pub fallback_links: usize,
    pub rules: BTreeMap<String, usize>,
    pub categories: BTreeMap<String, usize>,
}

impl SweepSummary {
    pub fn add(&mut self, r: &DiffRecord) {
        self.instances += 1;
        self.links += r.links.len();
        if r.mismatch {
            self.mismatched_instances += 1;
        }
        for d in &r.links {
            *self.rules.entry(d.rule.tag().to_string()).or_default() += 1;
            if d.rule == Rule::OracleFallback {
                self.fallback_links += 1;
            } else if d.structural != d.oracle {
                self.mismatched_links += 1;
            }
        }
        for c in &r.categories {
            *self.categories.entry(c.to_string()).or_default() += 1;
        }
    }

    pub fn fallback_rate(&self) -> f64 {
        if self.links == 0 {
            0.0
        } else {
            self.fallback_links as f64 / self.links as f64
        }
    }
}

/// Every monitor placement on `g`: all ordered pairs, or one sampled pair.
pub fn placements(g: &Graph, policy: MonitorPolicy, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    let nodes: Vec<NodeId> = g.nodes().iter().copied().collect();
    match policy {
        MonitorPolicy::AllPairs => nodes
            .iter()
            .flat_map(|&a| nodes.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
            .collect(),
        MonitorPolicy::Sampled => {
            let mut two: Vec<NodeId> = nodes.choose_multiple(rng, 2).copied().collect();
            two.shuffle(rng);
            vec![(two[0], two[1])]
        }
    }
}

const BATCH: usize = 4096;

/// Diffs `jobs` on a pool of scoped threads, one batch at a time, handing
/// records to `sink` in job order regardless of which worker finished first.
fn diff_ordered(
    jobs: impl Iterator<Item = Result<Graph>>,
    config: &OracleConfig,
    mut sink: impl FnMut(&DiffRecord),
) -> Result<SweepSummary> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut summary = SweepSummary::default();
    let mut jobs = jobs.enumerate().peekable();
    while jobs.peek().is_some() {
        let batch: Vec<(usize, Graph)> = jobs
            .by_ref()
            .take(BATCH)
            .map(|(i, g)| g.map(|g| (i, g)))
            .collect::<Result<_>>()?;
        let per = batch.len().div_ceil(workers);
        let mut records: Vec<Result<DiffRecord>> = std::thread::scope(|s| {
            let handles: Vec<_> = batch
                .chunks(per)
                .map(|chunk| {
                    s.spawn(move || {
                        chunk
                            .iter()
                            .map(|(i, g)| diff_instance(g, *i, config))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        records.sort_by_key(|r| r.as_ref().map_or(0, |r| r.index));
        for r in records {
            let r = r?;
            summary.add(&r);
            sink(&r);
        }
    }
    Ok(summary)
}

/// Runs the differ over a seeded random sweep, handing each record to
/// `sink` in instance order.
pub fn cli_diff(config: &SweepConfig, sink: impl FnMut(&DiffRecord)) -> Result<SweepSummary> {
    let jobs = (0..config.instances).flat_map(|i| -> Vec<Result<Graph>> {
        let g = match generate_graph(config, i) {
            Ok(g) => g,
            Err(e) => return vec![Err(e)],
        };
        match config.monitors {
            MonitorPolicy::Sampled => vec![Ok(g)],
            MonitorPolicy::AllPairs => placements(&g, MonitorPolicy::AllPairs, &mut instance_rng(config.seed, i))
                .into_iter()
                .map(|(a, b)| g.clone().with_monitors(a, b))
                .collect(),
        }
    });
    diff_ordered(jobs, &config.oracle(), sink)
}

/// Exhaustive differ over all connected graphs with `min..=max` nodes and
/// every ordered monitor pair.
pub fn exhaustive_diff(
    min: usize,
    max: usize,
    config: &OracleConfig,
    sink: impl FnMut(&DiffRecord),
) -> Result<SweepSummary> {
    let mut graphs = Vec::new();
    for n in min.max(2)..=max {
        graphs.extend(enumerate_all_connected_graphs(n)?);
    }
    let jobs = graphs.into_iter().flat_map(|g| {
        placements(&g, MonitorPolicy::AllPairs, &mut ChaCha8Rng::seed_from_u64(0))
            .into_iter()
            .map(move |(a, b)| g.clone().with_monitors(a, b))
            .collect::<Vec<_>>()
    });
    diff_ordered(jobs, config, sink)
}
