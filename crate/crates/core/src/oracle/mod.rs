//! Ground truth by brute force: enumerate every measurement path between the
//! two monitors, build the 0/1 path–link incidence matrix, and decide each
//! link by exact row-space membership of its unit vector.

pub mod linalg;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{format_rational, Graph, LinkId, NodeId};
use linalg::{IntEchelon, Rref};

pub const DEFAULT_PATH_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub path_cap: usize,
    /// Let a measurement path pass through a monitor between its endpoints
    /// (revisiting the monitor, never reusing a link). Off by default.
    pub allow_monitor_transit: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            path_cap: DEFAULT_PATH_CAP,
            allow_monitor_transit: false,
        }
    }
}

/// A measurement path as its node sequence and traversed links.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MeasurementPath {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

/// All `m1 → m2` measurement paths in lexicographic node order.
///
/// Without transit these are the simple paths; with transit a path may
/// return to a monitor as long as no other node and no link repeats.
pub fn enumerate_simple_paths(
    g: &Graph,
    m1: NodeId,
    m2: NodeId,
    config: &OracleConfig,
) -> Result<Vec<MeasurementPath>> {
    for m in [m1, m2] {
        if !g.nodes().contains(&m) {
            return Err(Error::MonitorNotInGraph(m));
        }
    }
    let mut out = Vec::new();
    let mut nodes = vec![m1];
    let mut links = Vec::new();
    let mut on_path: BTreeSet<NodeId> = BTreeSet::from([m1]);
    let mut used: BTreeSet<LinkId> = BTreeSet::new();
    let transit = |v: NodeId| config.allow_monitor_transit && (v == m1 || v == m2);
    dfs(
        g,
        m2,
        config.path_cap,
        &transit,
        &mut nodes,
        &mut links,
        &mut on_path,
        &mut used,
        &mut out,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &Graph,
    target: NodeId,
    cap: usize,
    transit: &dyn Fn(NodeId) -> bool,
    nodes: &mut Vec<NodeId>,
    links: &mut Vec<LinkId>,
    on_path: &mut BTreeSet<NodeId>,
    used: &mut BTreeSet<LinkId>,
    out: &mut Vec<MeasurementPath>,
) -> Result<()> {
    let u = *nodes.last().expect("path is never empty");
    if u == target && !links.is_empty() {
        if out.len() == cap {
            return Err(Error::PathExplosion {
                cap,
                reached: cap + 1,
            });
        }
        out.push(MeasurementPath {
            nodes: nodes.clone(),
            links: links.clone(),
        });
        if !transit(u) {
            return Ok(());
        }
    }
    for &(w, l) in g.neighbors(u) {
        if used.contains(&l) || (on_path.contains(&w) && !transit(w)) {
            continue;
        }
        let fresh = on_path.insert(w);
        used.insert(l);
        nodes.push(w);
        links.push(l);
        dfs(g, target, cap, transit, nodes, links, on_path, used, out)?;
        links.pop();
        nodes.pop();
        used.remove(&l);
        if fresh {
            on_path.remove(&w);
        }
    }
    Ok(())
}

/// Path–link incidence system, columns in link id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSystem {
    pub paths: Vec<MeasurementPath>,
    pub columns: Vec<LinkId>,
    pub matrix: Vec<Vec<i64>>,
    pub rhs: Option<Vec<BigRational>>,
}

pub fn build_measurement_matrix(paths: Vec<MeasurementPath>, g: &Graph) -> MeasurementSystem {
    let columns: Vec<LinkId> = g.links().keys().copied().collect();
    let index: BTreeMap<LinkId, usize> = columns.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let matrix: Vec<Vec<i64>> = paths
        .iter()
        .map(|p| {
            let mut row = vec![0; columns.len()];
            for l in &p.links {
                row[index[l]] += 1;
            }
            row
        })
        .collect();
    let rhs = g.metrics().map(|w| {
        paths
            .iter()
            .map(|p| {
                p.links
                    .iter()
                    .fold(BigRational::zero(), |acc, l| acc + w.get(l).cloned().unwrap_or_else(BigRational::zero))
            })
            .collect()
    });
    MeasurementSystem {
        paths,
        columns,
        matrix,
        rhs,
    }
}

impl MeasurementSystem {
    pub fn unit(&self, column: usize) -> Vec<i64> {
        let mut v = vec![0; self.columns.len()];
        v[column] = 1;
        v
    }

    /// Identifiable links by rank: `rank(M) == rank(M + e_l)`.
    pub fn identifiable_by_rank(&self) -> (BTreeSet<LinkId>, usize) {
        let e = IntEchelon::new(&self.matrix, self.columns.len());
        let set = (0..self.columns.len())
            .filter(|&c| e.contains(&self.unit(c)))
            .map(|c| self.columns[c])
            .collect();
        (set, e.rank())
    }

    /// Identifiable links by uniqueness: every null-space vector of `M`
    /// vanishes on the link, so all solutions agree on it.
    pub fn identifiable_by_uniqueness(&self) -> BTreeSet<LinkId> {
        let q: Vec<Vec<BigRational>> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        let ns = Rref::new(&q, self.columns.len()).null_space();
        (0..self.columns.len())
            .filter(|&c| ns.iter().all(|v| v[c].is_zero()))
            .map(|c| self.columns[c])
            .collect()
    }

    /// Rows as node sequences, columns as link ids.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("path");
        for l in &self.columns {
            let _ = write!(s, ",{}", l);
        }
        if self.rhs.is_some() {
            s.push_str(",sum");
        }
        s.push('\n');
        for (i, p) in self.paths.iter().enumerate() {
            let seq: Vec<String> = p.nodes.iter().map(|n| n.0.to_string()).collect();
            s.push_str(&seq.join("-"));
            for x in &self.matrix[i] {
                let _ = write!(s, ",{}", x);
            }
            if let Some(rhs) = &self.rhs {
                let _ = write!(s, ",{}", format_rational(&rhs[i]));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub identifiable: BTreeSet<LinkId>,
    pub path_count: usize,
    pub rank: usize,
    pub links: usize,
}

pub fn measurement_system(g: &Graph, config: &OracleConfig) -> Result<MeasurementSystem> {
    let (m1, m2) = g.require_monitors()?;
    let paths = enumerate_simple_paths(g, m1, m2, config)?;
    Ok(build_measurement_matrix(paths, g))
}

/// Links whose unit vector lies in the row space of the path–link matrix.
pub fn identifiable_links_bruteforce(g: &Graph, config: &OracleConfig) -> Result<OracleReport> {
    let sys = measurement_system(g, config)?;
    let (identifiable, rank) = sys.identifiable_by_rank();
    Ok(OracleReport {
        identifiable,
        path_count: sys.paths.len(),
        rank,
        links: sys.columns.len(),
    })
}

/// Two consistent solutions that disagree on a link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub link: LinkId,
    pub first: Vec<BigRational>,
    pub second: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryReport {
    pub columns: Vec<LinkId>,
    /// Identifiable link → value forced by the measurements.
    pub recovered: BTreeMap<LinkId, BigRational>,
    pub witnesses: Vec<Witness>,
    /// Every recovered value equals the true metric.
    pub exact: bool,
}

/// Solves the system built from the true metrics and checks that each
/// identifiable link is pinned to its true value while each other link has
/// two consistent solutions that differ on it.
pub fn verify_metric_recovery(
    g: &Graph,
    identifiable: &BTreeSet<LinkId>,
    config: &OracleConfig,
) -> Result<RecoveryReport> {
    let truth = g.metrics().ok_or(Error::BadMetric("metrics missing".into()))?;
    let sys = measurement_system(g, config)?;
    let rhs = sys.rhs.as_ref().expect("metrics present");
    let width = sys.columns.len();
    let augmented: Vec<Vec<BigRational>> = sys
        .matrix
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            r.iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .chain(std::iter::once(b.clone()))
                .collect()
        })
        .collect();
    let rref = Rref::new(&augmented, width);
    let particular = rref.particular_solution().ok_or(Error::InconsistentSystem)?;
    let null = rref.null_space();
    let true_vec: Vec<BigRational> = sys
        .columns
        .iter()
        .map(|l| truth.get(l).cloned().unwrap_or_else(BigRational::zero))
        .collect();

    let mut recovered = BTreeMap::new();
    let mut witnesses = Vec::new();
    let mut exact = true;
    for (c, &l) in sys.columns.iter().enumerate() {
        let pinned = null.iter().all(|v| v[c].is_zero());
        if identifiable.contains(&l) {
            if !pinned {
                exact = false;
            }
            if particular[c] != true_vec[c] {
                exact = false;
            }
            recovered.insert(l, particular[c].clone());
        } else if let Some(dir) = null.iter().find(|v| !v[c].is_zero()) {
            // step small enough that every metric stays positive
            let mut step = BigRational::one();
            for (a, d) in true_vec.iter().zip(dir) {
                if d.is_negative() && a.is_positive() {
                    let limit = a / (-d * BigRational::from_integer(2.into()));
                    if limit < step {
                        step = limit;
                    }
                }
            }
            let second: Vec<BigRational> = true_vec.iter().zip(dir).map(|(a, b)| a + &step * b).collect();
            witnesses.push(Witness {
                link: l,
                first: true_vec.clone(),
                second,
            });
        } else {
            exact = false;
        }
    }
    Ok(RecoveryReport {
        columns: sys.columns,
        recovered,
        witnesses,
        exact,
    })
}

/// `M x == rhs` exactly.
pub fn satisfies(sys: &MeasurementSystem, x: &[BigRational]) -> bool {
    let Some(rhs) = &sys.rhs else { return false };
    sys.matrix.iter().zip(rhs).all(|(row, b)| {
        let s = row
            .iter()
            .zip(x)
            .filter(|(&a, _)| a != 0)
            .fold(BigRational::zero(), |acc, (&a, v)| acc + BigRational::from_integer(a.into()) * v);
        &s == b
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: u32, edges: &[(u32, u32)], mon: (u32, u32)) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        Graph::build((0..n).map(NodeId), &e, Some((NodeId(mon.0), NodeId(mon.1)))).unwrap()
    }

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn ids(v: &[u32]) -> BTreeSet<LinkId> {
        v.iter().map(|&i| LinkId(i)).collect()
    }

    #[test]
    fn path_counts() {
        let cfg = OracleConfig::default();
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)], (0, 1));
        let p = enumerate_simple_paths(&tri, NodeId(0), NodeId(1), &cfg).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].nodes, vec![NodeId(0), NodeId(1)]);
        assert_eq!(p[1].nodes, vec![NodeId(0), NodeId(2), NodeId(1)]);

        let path = graph(3, &[(0, 1), (1, 2)], (0, 2));
        assert_eq!(enumerate_simple_paths(&path, NodeId(0), NodeId(2), &cfg).unwrap().len(), 1);

        let k4 = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], (0, 1));
        assert_eq!(enumerate_simple_paths(&k4, NodeId(0), NodeId(1), &cfg).unwrap().len(), 5);

        let tight = OracleConfig {
            path_cap: 4,
            ..cfg
        };
        assert!(matches!(
            enumerate_simple_paths(&k4, NodeId(0), NodeId(1), &tight),
            Err(Error::PathExplosion { cap: 4, .. })
        ));
    }

    #[test]
    fn transit_adds_walks_through_monitors() {
        // triangle 0-1-2 with monitors 0 and 3 hanging off 0 via 0-3 and 2-3
        let g = graph(4, &[(0, 1), (1, 2), (0, 2), (2, 3)], (0, 3));
        let off = OracleConfig::default();
        let on = OracleConfig {
            allow_monitor_transit: true,
            ..off
        };
        let a = enumerate_simple_paths(&g, NodeId(0), NodeId(3), &off).unwrap();
        let b = enumerate_simple_paths(&g, NodeId(0), NodeId(3), &on).unwrap();
        assert_eq!(a.len(), 2);
        // 0-1-2-0-... cannot continue (0's links used), 0-2-1-0 likewise;
        // transit only helps when the loop returns through a spare link
        assert!(b.len() >= a.len());
        for p in &b {
            let mut l = p.links.clone();
            l.sort();
            l.dedup();
            assert_eq!(l.len(), p.links.len());
        }
    }

    #[test]
    fn triangle_matrix_and_rhs() {
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)], (0, 1))
            .with_metrics(BTreeMap::from([
                (LinkId(0), q(1, 1)),
                (LinkId(1), q(1, 2)),
                (LinkId(2), q(1, 3)),
            ]))
            .unwrap();
        let sys = measurement_system(&tri, &OracleConfig::default()).unwrap();
        // columns e0=01, e1=12, e2=02; paths 0-1 and 0-2-1
        assert_eq!(sys.matrix, vec![vec![1, 0, 0], vec![0, 1, 1]]);
        assert_eq!(sys.rhs.unwrap(), vec![q(1, 1), q(5, 6)]);
    }

    #[test]
    fn identifiable_examples() {
        let cfg = OracleConfig::default();
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)], (0, 1));
        assert_eq!(identifiable_links_bruteforce(&tri, &cfg).unwrap().identifiable, ids(&[0]));

        let single = graph(2, &[(0, 1)], (0, 1));
        assert_eq!(identifiable_links_bruteforce(&single, &cfg).unwrap().identifiable, ids(&[0]));

        let path = graph(3, &[(0, 1), (1, 2)], (0, 2));
        let r = identifiable_links_bruteforce(&path, &cfg).unwrap();
        assert!(r.identifiable.is_empty());
        assert_eq!(r.rank, 1);

        // K4 minus the monitor link: only the interior link 2-3 is pinned
        let k4m = graph(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], (0, 1));
        let sys = measurement_system(&k4m, &cfg).unwrap();
        assert_eq!(sys.identifiable_by_rank().0, ids(&[4]));
        assert_eq!(sys.identifiable_by_uniqueness(), ids(&[4]));
    }

    #[test]
    fn triangle_recovery() {
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)], (0, 1))
            .with_metrics(BTreeMap::from([
                (LinkId(0), q(2, 1)),
                (LinkId(1), q(3, 1)),
                (LinkId(2), q(5, 1)),
            ]))
            .unwrap();
        let cfg = OracleConfig::default();
        let ident = identifiable_links_bruteforce(&tri, &cfg).unwrap().identifiable;
        let rep = verify_metric_recovery(&tri, &ident, &cfg).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.recovered[&LinkId(0)], q(2, 1));
        assert_eq!(rep.witnesses.len(), 2);
        let sys = measurement_system(&tri, &cfg).unwrap();
        for w in &rep.witnesses {
            assert!(satisfies(&sys, &w.first) && satisfies(&sys, &w.second));
            let c = sys.columns.iter().position(|&l| l == w.link).unwrap();
            assert_ne!(w.first[c], w.second[c]);
        }
    }

    #[test]
    fn single_path_recovers_nothing() {
        let g = graph(3, &[(0, 1), (1, 2)], (0, 2))
            .with_metrics(BTreeMap::from([(LinkId(0), q(1, 1)), (LinkId(1), q(4, 1))]))
            .unwrap();
        let cfg = OracleConfig::default();
        let rep = verify_metric_recovery(&g, &BTreeSet::new(), &cfg).unwrap();
        assert!(rep.recovered.is_empty());
        assert_eq!(rep.witnesses.len(), 2);
        assert!(rep.exact);
    }

    #[test]
    fn csv_dump() {
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)], (0, 1));
        let sys = measurement_system(&tri, &OracleConfig::default()).unwrap();
        assert_eq!(sys.to_csv(), "path,e0,e1,e2\n0-1,1,0,0\n0-2-1,0,1,1\n");
    }
}
