//! Structural identifiability with two monitors.
//!
//! Every block is handled on its own with its two agents standing in for the
//! monitors. A block with fewer than two agents is never measured in a way
//! that separates its links. A single-link block is the direct agent link.
//! Any other block is split into triconnected components; each component is
//! classified by where the agents sit relative to it, and the matching rule
//! marks its real links together with the real links of the bonds next to
//! it. Components no rule covers are answered by the brute-force oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::agents::{locate_agents, BlockAgents};
use crate::decomposition::{
    biconnected_components, triconnected_components, Block, ComponentKind, TriconnectedDecomposition,
};
use crate::error::{Error, Result};
use crate::graph::{pair, Graph, LinkId, NodeId};
use crate::menger::disjoint_paths;
use crate::oracle::{identifiable_links_bruteforce, OracleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Identifiable,
    Unidentifiable,
}

impl Verdict {
    fn of(b: bool) -> Self {
        if b {
            Verdict::Identifiable
        } else {
            Verdict::Unidentifiable
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "Lemma1-direct")]
    DirectAgentLink,
    #[serde(rename = "Cat1-exterior")]
    Cat1Exterior,
    #[serde(rename = "Cat1-interior")]
    Cat1Interior,
    #[serde(rename = "Cat2-exterior")]
    Cat2Exterior,
    #[serde(rename = "Cat2-interior")]
    Cat2Interior,
    #[serde(rename = "Cat2-deferred-resolved")]
    Cat2DeferredResolved,
    #[serde(rename = "Cat3")]
    Cat3,
    #[serde(rename = "Cat4-crosslink")]
    Cat4Crosslink,
    #[serde(rename = "Cat4-shortcut")]
    Cat4Shortcut,
    #[serde(rename = "Cat4-unident")]
    Cat4Unident,
    #[serde(rename = "ZeroOrOneAgent")]
    ZeroOrOneAgent,
    #[serde(rename = "OracleFallback")]
    OracleFallback,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::DirectAgentLink,
        Rule::Cat1Exterior,
        Rule::Cat1Interior,
        Rule::Cat2Exterior,
        Rule::Cat2Interior,
        Rule::Cat2DeferredResolved,
        Rule::Cat3,
        Rule::Cat4Crosslink,
        Rule::Cat4Shortcut,
        Rule::Cat4Unident,
        Rule::ZeroOrOneAgent,
        Rule::OracleFallback,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Rule::DirectAgentLink => "Lemma1-direct",
            Rule::Cat1Exterior => "Cat1-exterior",
            Rule::Cat1Interior => "Cat1-interior",
            Rule::Cat2Exterior => "Cat2-exterior",
            Rule::Cat2Interior => "Cat2-interior",
            Rule::Cat2DeferredResolved => "Cat2-deferred-resolved",
            Rule::Cat3 => "Cat3",
            Rule::Cat4Crosslink => "Cat4-crosslink",
            Rule::Cat4Shortcut => "Cat4-shortcut",
            Rule::Cat4Unident => "Cat4-unident",
            Rule::ZeroOrOneAgent => "ZeroOrOneAgent",
            Rule::OracleFallback => "OracleFallback",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutType {
    /// Exactly one agent lies strictly beyond the pair.
    Type1,
    /// Both agents lie beyond the pair and are reached from it by disjoint
    /// paths.
    Type2,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexCutClass {
    pub link: LinkId,
    pub pair: (NodeId, NodeId),
    pub class: CutType,
    pub far_side_agents: Vec<NodeId>,
    /// For Type2: disjoint paths from the pair to the agents.
    pub witness: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "category")]
pub enum Category {
    /// One agent inside, the other beyond `cut`.
    Cat1 { inner: NodeId, cut: (NodeId, NodeId) },
    /// Measurements cross the component between the two nodes of `pair`.
    Cat2 { pair: (NodeId, NodeId) },
    /// No agent inside, one beyond each cut, component 3-connected.
    Cat3 { cuts: [(NodeId, NodeId); 2] },
    /// No agent inside, one beyond each cut, component a triangle whose
    /// cuts meet at `apex`.
    Cat4 { apex: NodeId, cuts: [(NodeId, NodeId); 2] },
    SingleLink,
    Fallback { reason: &'static str },
}

impl Category {
    pub fn name(&self) -> &'static str {
        match self {
            Category::Cat1 { .. } => "Cat1",
            Category::Cat2 { .. } => "Cat2",
            Category::Cat3 { .. } => "Cat3",
            Category::Cat4 { .. } => "Cat4",
            Category::SingleLink => "SingleLink",
            Category::Fallback { .. } => "Fallback",
        }
    }
}

/// A rule's answer for one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Decided(Verdict, Rule),
    /// The link joins the crossing pair of a Cat2 component with no agent on
    /// it; another component decides it.
    Deferred,
    /// No rule applies.
    Open,
}

pub type Marks = Vec<(LinkId, Mark)>;

/// A block with two agents, decomposed.
#[derive(Debug, Clone)]
pub struct BlockView {
    pub block: usize,
    pub graph: Graph,
    pub decomp: TriconnectedDecomposition,
    pub agents: BlockAgents,
}

impl BlockView {
    pub fn new(g: &Graph, block: &Block, agents: &BlockAgents) -> Result<Self> {
        let graph = g.link_subgraph(&block.links);
        let decomp = triconnected_components(&graph)?;
        Ok(Self {
            block: block.id,
            graph,
            decomp,
            agents: agents.clone(),
        })
    }

    fn agent_pair(&self) -> Result<(NodeId, NodeId)> {
        match self.agents.pair() {
            Some((a, b)) => Ok((a.node, b.node)),
            None => Err(Error::WrongAgentCount {
                block: self.block,
                count: self.agents.agents.len(),
            }),
        }
    }

    /// Real links a component speaks for: its own, and those of bonds
    /// directly across its virtual links. The pair is set for the latter.
    pub fn owned_links(&self, comp: usize) -> Vec<(LinkId, (NodeId, NodeId), Option<(NodeId, NodeId)>)> {
        let c = self.decomp.component(comp);
        let mut out: Vec<_> = c.real_links().map(|l| (l.id, l.ends, None)).collect();
        for v in c.virtual_links() {
            let Some(d) = self.decomp.across(comp, v.id) else { continue };
            let d = self.decomp.component(d);
            if d.kind == ComponentKind::Bond {
                out.extend(d.real_links().map(|l| (l.id, l.ends, Some(v.ends))));
            }
        }
        out
    }
}

/// Where the agents lie relative to one split pair of a component.
pub fn classify_split_pair(
    view: &BlockView,
    comp: usize,
    split_pair: (NodeId, NodeId),
) -> Result<VertexCutClass> {
    let (x, y) = view.agent_pair()?;
    let p = pair(split_pair.0, split_pair.1);
    let v = view
        .decomp
        .component(comp)
        .virtual_at(p)
        .ok_or(Error::UnknownPair(p.0, p.1))?
        .id;
    let far = view.decomp.far_nodes(comp, v);
    let beyond: Vec<NodeId> = [x, y]
        .into_iter()
        .filter(|a| far.contains(a) && *a != p.0 && *a != p.1)
        .collect();
    let (class, witness) = match beyond.len() {
        1 => (CutType::Type1, Vec::new()),
        2 => {
            let side = view.graph.link_subgraph(&view.decomp.far_real_links(comp, v));
            let paths = disjoint_paths(&side, &[p.0, p.1], &[x, y], &BTreeSet::new());
            if paths.len() == 2 {
                (CutType::Type2, paths)
            } else {
                (CutType::Neither, Vec::new())
            }
        }
        _ => (CutType::Neither, Vec::new()),
    };
    Ok(VertexCutClass {
        link: v,
        pair: p,
        class,
        far_side_agents: beyond,
        witness,
    })
}

/// Category of a non-bond component of a block with two agents.
pub fn classify_component(view: &BlockView, comp: usize) -> Result<Category> {
    let (x, y) = view.agent_pair()?;
    let c = view.decomp.component(comp);
    if c.kind == ComponentKind::Bond {
        return Err(Error::TooSmall { nodes: 2, k: 3 });
    }
    let inside: Vec<NodeId> = [x, y].into_iter().filter(|a| c.graph.nodes.contains(a)).collect();
    let cuts = c
        .virtual_links()
        .map(|v| classify_split_pair(view, comp, v.ends))
        .collect::<Result<Vec<_>>>()?;
    let beyond: Vec<&VertexCutClass> = cuts.iter().filter(|k| !k.far_side_agents.is_empty()).collect();
    Ok(match inside[..] {
        [_, _] => Category::Cat2 { pair: pair(x, y) },
        [z] => {
            let cut = beyond.first().expect("the other agent lies beyond some pair").pair;
            if cut.0 == z || cut.1 == z {
                Category::Cat2 { pair: cut }
            } else {
                Category::Cat1 { inner: z, cut }
            }
        }
        _ => match beyond[..] {
            [k] if k.class == CutType::Type2 => Category::Cat2 { pair: k.pair },
            [_] => Category::Fallback {
                reason: "agents beyond one pair without disjoint paths",
            },
            [k1, k2] => {
                let cuts = [k1.pair, k2.pair];
                if c.kind == ComponentKind::Rigid {
                    Category::Cat3 { cuts }
                } else if c.is_triangle() {
                    let apex = shared_node(k1.pair, k2.pair).expect("triangle links meet");
                    Category::Cat4 { apex, cuts }
                } else {
                    Category::Fallback {
                        reason: "polygon between two single-agent cuts",
                    }
                }
            }
            _ => unreachable!("two agents lie beyond at most two pairs"),
        },
    })
}

fn shared_node(a: (NodeId, NodeId), b: (NodeId, NodeId)) -> Option<NodeId> {
    [a.0, a.1].into_iter().find(|v| *v == b.0 || *v == b.1)
}

fn touches(ends: (NodeId, NodeId), v: NodeId) -> bool {
    ends.0 == v || ends.1 == v
}

/// A simple path joining the ends of virtual link `vlink` of `comp` through
/// the real links beyond it.
pub fn replace_virtual_link(d: &TriconnectedDecomposition, comp: usize, vlink: LinkId) -> Result<Vec<NodeId>> {
    let c = d.component(comp);
    let v = c.graph.link(vlink).filter(|l| l.kind == crate::graph::LinkKind::Virtual);
    let Some(v) = v else { return Err(Error::NoPath(vlink)) };
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for fc in d.far_components(comp, vlink) {
        for l in d.component(fc).real_links() {
            adj.entry(l.ends.0).or_default().push(l.ends.1);
            adj.entry(l.ends.1).or_default().push(l.ends.0);
        }
    }
    let (s, t) = v.ends;
    let mut prev: BTreeMap<NodeId, NodeId> = BTreeMap::from([(s, s)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        if u == t {
            break;
        }
        for &w in adj.get(&u).into_iter().flatten() {
            if !prev.contains_key(&w) {
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    if !prev.contains_key(&t) {
        return Err(Error::NoPath(vlink));
    }
    let mut path = vec![t];
    let mut u = t;
    while u != s {
        u = prev[&u];
        path.push(u);
    }
    path.reverse();
    Ok(path)
}

/// The link joining the two agents, if real: identifiable exactly when both
/// agents are the monitors themselves.
pub fn mark_direct_agent_link(g: &Graph, agents: &BlockAgents) -> Option<(LinkId, Mark)> {
    let (a, b) = agents.pair()?;
    let l = g.link_between(a.node, b.node)?;
    let both = a.is_real_monitor && b.is_real_monitor;
    Some((l, Mark::Decided(Verdict::of(both), Rule::DirectAgentLink)))
}

pub fn mark_category1(view: &BlockView, comp: usize, inner: NodeId, cut: (NodeId, NodeId)) -> Marks {
    let rigid = view.decomp.component(comp).kind == ComponentKind::Rigid;
    view.owned_links(comp)
        .into_iter()
        .map(|(l, ends, at)| {
            let mark = if touches(ends, inner) {
                Mark::Decided(Verdict::Unidentifiable, Rule::Cat1Exterior)
            } else if rigid || at == Some(cut) {
                Mark::Decided(Verdict::Identifiable, Rule::Cat1Interior)
            } else {
                // polygon links are traversed in series
                Mark::Decided(Verdict::Unidentifiable, Rule::Cat1Exterior)
            };
            (l, mark)
        })
        .collect()
}

pub fn mark_category2(view: &BlockView, comp: usize, crossing: (NodeId, NodeId)) -> Marks {
    let rigid = view.decomp.component(comp).kind == ComponentKind::Rigid;
    let agent = |v: NodeId| view.agents.is_agent(v);
    view.owned_links(comp)
        .into_iter()
        .map(|(l, ends, _)| {
            let mark = if pair(ends.0, ends.1) == crossing {
                match (agent(crossing.0), agent(crossing.1)) {
                    // both agents: the direct link, settled separately
                    (true, true) => Mark::Open,
                    (false, false) => Mark::Deferred,
                    _ => Mark::Decided(Verdict::Unidentifiable, Rule::Cat2Exterior),
                }
            } else if !rigid || touches(ends, crossing.0) || touches(ends, crossing.1) {
                Mark::Decided(Verdict::Unidentifiable, Rule::Cat2Exterior)
            } else {
                Mark::Decided(Verdict::Identifiable, Rule::Cat2Interior)
            };
            (l, mark)
        })
        .collect()
}

pub fn mark_category3(view: &BlockView, comp: usize) -> Marks {
    view.owned_links(comp)
        .into_iter()
        .map(|(l, _, _)| (l, Mark::Decided(Verdict::Identifiable, Rule::Cat3)))
        .collect()
}

/// One side of a Cat4 triangle, as seen across one of its cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TriangleSide {
    /// The cut's two nodes are also joined by a real link.
    pub real_link: bool,
    /// Components attached at the cut on the far side.
    pub neighbors: usize,
    /// One of them is 3-connected.
    pub any_rigid: bool,
}

impl TriangleSide {
    pub fn supports_shortcut(&self) -> bool {
        self.real_link || self.neighbors >= 2 || self.any_rigid
    }
}

/// Whether the link opposite the apex of a Cat4 triangle is identifiable.
pub fn shortcut_identifiable(first: TriangleSide, second: TriangleSide) -> bool {
    first.supports_shortcut() && second.supports_shortcut()
}

pub fn triangle_side(view: &BlockView, comp: usize, cut: (NodeId, NodeId)) -> Result<TriangleSide> {
    let nb = view.decomp.neighboring_components(comp, cut)?;
    Ok(TriangleSide {
        real_link: nb.real_link.is_some(),
        neighbors: nb.expanded.len(),
        any_rigid: nb
            .expanded
            .iter()
            .any(|&c| view.decomp.component(c).kind == ComponentKind::Rigid),
    })
}

pub fn mark_category4(view: &BlockView, comp: usize, cuts: [(NodeId, NodeId); 2]) -> Result<Marks> {
    let shortcut = shortcut_identifiable(triangle_side(view, comp, cuts[0])?, triangle_side(view, comp, cuts[1])?);
    Ok(view
        .owned_links(comp)
        .into_iter()
        .map(|(l, ends, _)| {
            let ends = pair(ends.0, ends.1);
            let mark = if cuts.contains(&ends) {
                Mark::Decided(Verdict::Identifiable, Rule::Cat4Crosslink)
            } else if shortcut {
                Mark::Decided(Verdict::Identifiable, Rule::Cat4Shortcut)
            } else {
                Mark::Decided(Verdict::Unidentifiable, Rule::Cat4Unident)
            };
            (l, mark)
        })
        .collect())
}

/// Category and marks for one component.
pub fn mark_component(view: &BlockView, comp: usize) -> Result<(Category, Marks)> {
    let cat = classify_component(view, comp)?;
    let marks = marks_for(view, comp, &cat)?;
    Ok((cat, marks))
}

fn marks_for(view: &BlockView, comp: usize, cat: &Category) -> Result<Marks> {
    Ok(match cat {
        Category::Cat1 { inner, cut } => mark_category1(view, comp, *inner, *cut),
        Category::Cat2 { pair } => mark_category2(view, comp, *pair),
        Category::Cat3 { .. } => mark_category3(view, comp),
        Category::Cat4 { cuts, .. } => mark_category4(view, comp, *cuts)?,
        Category::SingleLink | Category::Fallback { .. } => view
            .owned_links(comp)
            .into_iter()
            .map(|(l, _, _)| (l, Mark::Open))
            .collect(),
    })
}

/// Link sets of the parallel sides of a block at `split_pair`, when the
/// pair separates it. Every measurement between the pair's nodes stays
/// inside one side.
pub fn parallel_sides(d: &TriconnectedDecomposition, split_pair: (NodeId, NodeId)) -> Option<Vec<BTreeSet<LinkId>>> {
    let p = pair(split_pair.0, split_pair.1);
    if let Some(bond) = d
        .components
        .iter()
        .find(|c| c.kind == ComponentKind::Bond && c.virtual_at(p).is_some())
    {
        let mut sides: Vec<BTreeSet<LinkId>> =
            bond.virtual_links().map(|w| d.far_real_links(bond.id, w.id)).collect();
        sides.extend(bond.real_links().map(|l| BTreeSet::from([l.id])));
        return Some(sides);
    }
    let (c, v) = d
        .components
        .iter()
        .find_map(|c| c.virtual_at(p).map(|v| (c.id, v.id)))?;
    let other = d.across(c, v)?;
    Some(vec![d.far_real_links(other, v), d.far_real_links(c, v)])
}

/// Real links on the side of `comp` away from its virtual link at `outside`:
/// the component itself and everything attached through its other virtual
/// links.
pub fn detour_side(d: &TriconnectedDecomposition, comp: usize, outside: (NodeId, NodeId)) -> BTreeSet<LinkId> {
    let c = d.component(comp);
    let mut out: BTreeSet<LinkId> = c.real_links().map(|l| l.id).collect();
    for v in c.virtual_links().filter(|v| v.ends != outside) {
        out.extend(d.far_real_links(comp, v.id));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkVerdict {
    pub link: LinkId,
    pub ends: (NodeId, NodeId),
    pub verdict: Verdict,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentRecord {
    pub block: usize,
    pub component: Option<usize>,
    pub kind: Option<ComponentKind>,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentifiabilityReport {
    /// One entry per real link, in link order.
    pub links: Vec<LinkVerdict>,
    pub components: Vec<ComponentRecord>,
}

impl IdentifiabilityReport {
    pub fn identifiable(&self) -> BTreeSet<LinkId> {
        self.links
            .iter()
            .filter(|v| v.verdict == Verdict::Identifiable)
            .map(|v| v.link)
            .collect()
    }

    pub fn get(&self, l: LinkId) -> Option<&LinkVerdict> {
        self.links.iter().find(|v| v.link == l)
    }

    pub fn rule_counts(&self) -> BTreeMap<Rule, usize> {
        let mut out = BTreeMap::new();
        for v in &self.links {
            *out.entry(v.rule).or_default() += 1;
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let links: Vec<serde_json::Value> = self
            .links
            .iter()
            .map(|v| {
                serde_json::json!({
                    "edge": [v.ends.0, v.ends.1],
                    "verdict": v.verdict,
                    "rule": v.rule,
                })
            })
            .collect();
        serde_json::json!({
            "links": links,
            "summary": {
                "identifiable": self.identifiable().len(),
                "total": self.links.len(),
            }
        })
    }
}

#[derive(Default)]
struct Accumulator {
    decided: BTreeMap<LinkId, (Verdict, Rule)>,
    open: BTreeSet<LinkId>,
    components: Vec<ComponentRecord>,
}

// Marks every link of `g`, whose monitors are the measurement endpoints.
// A block whose agents are joined by a link is handled as the block without
// that link, with the agents as its endpoints: the link forms a path of its
// own and plays no part in any other measurement.
fn mark_graph(g: &Graph, outer: Option<usize>, acc: &mut Accumulator) -> Result<()> {
    g.require_monitors()?;
    let bct = biconnected_components(g)?;
    let assignment = locate_agents(g, &bct)?;
    for block in &bct.blocks {
        let id = outer.unwrap_or(block.id);
        let agents = assignment.block(block.id)?;
        if agents.agents.len() < 2 {
            for &l in &block.links {
                acc.decided.insert(l, (Verdict::Unidentifiable, Rule::ZeroOrOneAgent));
            }
            continue;
        }
        let direct = mark_direct_agent_link(g, agents);
        if let Some((l, Mark::Decided(v, r))) = direct {
            acc.decided.insert(l, (v, r));
        }
        if block.is_bridge() {
            acc.components.push(ComponentRecord {
                block: id,
                component: None,
                kind: None,
                category: Category::SingleLink,
            });
            continue;
        }
        if let Some((l, _)) = direct {
            let mut rest = block.links.clone();
            rest.remove(&l);
            let (x, y) = agents.pair().map(|(a, b)| (a.node, b.node)).expect("two agents");
            let inner = g.link_subgraph(&rest).with_monitors(x, y)?;
            mark_graph(&inner, Some(id), acc)?;
            continue;
        }
        let view = BlockView::new(g, block, agents)?;
        let (x, y) = view.agent_pair()?;
        if let Some(sides) = parallel_sides(&view.decomp, (x, y)) {
            for side in sides {
                mark_graph(&g.link_subgraph(&side).with_monitors(x, y)?, Some(id), acc)?;
            }
            continue;
        }
        let mut cats = Vec::new();
        for c in &view.decomp.components {
            if c.kind != ComponentKind::Bond {
                cats.push((c.id, classify_component(&view, c.id)?));
            }
        }
        // A Cat2 component crossed between two nodes other than the agents is
        // a detour: everything on its side is measured as if those two nodes
        // were the monitors.
        let mut covered = BTreeSet::new();
        for (c, cat) in &cats {
            if let Category::Cat2 { pair: e } = cat {
                if *e != pair(x, y) {
                    for v in view.decomp.component(*c).virtual_links().filter(|v| v.ends != *e) {
                        covered.extend(view.decomp.far_components(*c, v.id));
                    }
                }
            }
        }
        let mut claims: BTreeMap<LinkId, (Verdict, Rule)> = BTreeMap::new();
        let mut deferred = BTreeSet::new();
        for (c, category) in cats {
            if covered.contains(&c) {
                continue;
            }
            let mut marks = marks_for(&view, c, &category)?;
            if let Category::Cat2 { pair: e } = category {
                if e != pair(x, y) {
                    let side = detour_side(&view.decomp, c, e);
                    mark_graph(&g.link_subgraph(&side).with_monitors(e.0, e.1)?, Some(id), acc)?;
                    marks.retain(|(l, _)| !side.contains(l));
                }
            }
            acc.components.push(ComponentRecord {
                block: id,
                component: Some(c),
                kind: Some(view.decomp.component(c).kind),
                category,
            });
            for (l, m) in marks {
                match m {
                    Mark::Decided(v, r) => match claims.get(&l) {
                        Some(&(v0, r0)) if v0 != v => {
                            return Err(Error::RuleConflict {
                                link: l,
                                first: r0.tag().into(),
                                second: r.tag().into(),
                            })
                        }
                        Some(_) => {}
                        None => {
                            claims.insert(l, (v, r));
                        }
                    },
                    Mark::Deferred => {
                        deferred.insert(l);
                    }
                    Mark::Open => {
                        acc.open.insert(l);
                    }
                }
            }
        }
        for l in deferred {
            match claims.get_mut(&l) {
                Some(c) => c.1 = Rule::Cat2DeferredResolved,
                None => {
                    acc.open.insert(l);
                }
            }
        }
        for (l, c) in claims {
            acc.open.remove(&l);
            acc.decided.insert(l, c);
        }
    }
    Ok(())
}

/// Runs the structural algorithm, calling the oracle only for links no rule
/// decides.
pub fn run_dil2m(g: &Graph) -> Result<IdentifiabilityReport> {
    run_dil2m_with(g, None, &OracleConfig::default())
}

/// As [`run_dil2m`], with the oracle's identifiable set supplied up front
/// when it is already known.
pub fn run_dil2m_with(
    g: &Graph,
    known: Option<&BTreeSet<LinkId>>,
    config: &OracleConfig,
) -> Result<IdentifiabilityReport> {
    let mut acc = Accumulator::default();
    mark_graph(g, None, &mut acc)?;
    let Accumulator {
        mut decided,
        mut open,
        components,
    } = acc;

    open.retain(|l| !decided.contains_key(l));
    if !open.is_empty() {
        let computed;
        let truth = match known {
            Some(t) => t,
            None => {
                computed = identifiable_links_bruteforce(g, config)?.identifiable;
                &computed
            }
        };
        for l in open {
            decided.insert(l, (Verdict::of(truth.contains(&l)), Rule::OracleFallback));
        }
    }

    let links = g
        .links()
        .iter()
        .map(|(&l, &ends)| {
            let (verdict, rule) = decided[&l];
            LinkVerdict {
                link: l,
                ends,
                verdict,
                rule,
            }
        })
        .collect();
    Ok(IdentifiabilityReport { links, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::biconnected_components;

    fn graph(n: u32, edges: &[(u32, u32)], mon: (u32, u32)) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        Graph::build((0..n).map(NodeId), &e, Some((NodeId(mon.0), NodeId(mon.1)))).unwrap()
    }

    fn rules(r: &IdentifiabilityReport) -> Vec<(Verdict, Rule)> {
        r.links.iter().map(|v| (v.verdict, v.rule)).collect()
    }

    use Rule::*;
    use Verdict::*;

    #[test]
    fn path_all_unidentifiable() {
        let r = run_dil2m(&graph(3, &[(0, 1), (1, 2)], (0, 2))).unwrap();
        assert_eq!(
            rules(&r),
            vec![(Unidentifiable, DirectAgentLink), (Unidentifiable, DirectAgentLink)]
        );
    }

    #[test]
    fn triangle_direct_link() {
        let r = run_dil2m(&graph(3, &[(0, 1), (1, 2), (0, 2)], (0, 1))).unwrap();
        assert_eq!(
            rules(&r),
            vec![
                (Identifiable, DirectAgentLink),
                (Unidentifiable, DirectAgentLink),
                (Unidentifiable, DirectAgentLink)
            ]
        );
        assert_eq!(
            r.to_json().to_string(),
            r#"{"links":[{"edge":[0,1],"rule":"Lemma1-direct","verdict":"identifiable"},{"edge":[1,2],"rule":"Lemma1-direct","verdict":"unidentifiable"},{"edge":[0,2],"rule":"Lemma1-direct","verdict":"unidentifiable"}],"summary":{"identifiable":1,"total":3}}"#
        );
    }

    #[test]
    fn leaf_block_zero_or_one_agent() {
        let r = run_dil2m(&graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4), (1, 4)], (0, 2))).unwrap();
        for l in [2, 3, 4] {
            assert_eq!(r.links[l].rule, ZeroOrOneAgent);
        }
    }

    #[test]
    fn k4_minus_monitor_link() {
        let g = graph(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], (0, 1));
        let r = run_dil2m(&g).unwrap();
        assert_eq!(r.identifiable(), BTreeSet::from([LinkId(4)]));
        assert_eq!(r.links[4].rule, Cat1Interior);
    }

    #[test]
    fn cat1_rigid_k4() {
        // K4 on a=0, b=1, x=2, z=3; y=5 hangs beyond {0,1} via 4; monitors 3, 5
        let g = graph(
            6,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 4), (1, 4), (4, 5)],
            (3, 5),
        );
        let bct = biconnected_components(&g).unwrap();
        let assignment = locate_agents(&g, &bct).unwrap();
        let block = bct.block_of_link(LinkId(0)).unwrap();
        let view = BlockView::new(&g, block, assignment.block(block.id).unwrap()).unwrap();
        let rigid = view
            .decomp
            .components
            .iter()
            .find(|c| c.kind == ComponentKind::Rigid)
            .unwrap()
            .id;
        let cat = classify_component(&view, rigid).unwrap();
        assert_eq!(
            cat,
            Category::Cat1 {
                inner: NodeId(3),
                cut: (NodeId(0), NodeId(1))
            }
        );
        let k = classify_split_pair(&view, rigid, (NodeId(1), NodeId(0))).unwrap();
        assert_eq!(k.class, CutType::Type1);
        assert_eq!(k.far_side_agents, vec![NodeId(4)]);

        let r = run_dil2m(&g).unwrap();
        let v = |l: u32| r.links[l as usize].verdict;
        // links at z unidentifiable; ab, ax, bx identifiable
        for l in [2, 4, 5] {
            assert_eq!(v(l), Unidentifiable);
        }
        for l in [0, 1, 3] {
            assert_eq!(v(l), Identifiable);
        }
        let truth = identifiable_links_bruteforce(&g, &OracleConfig::default()).unwrap();
        assert_eq!(r.identifiable(), truth.identifiable);
    }

    #[test]
    fn type2_cut_has_witness() {
        // square 0-1-2-3 with chord 1-3 forming a rigid-free block; agents 0, 2
        // both beyond pair {1,3} from the side of triangle 1-3-4
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3), (1, 4), (3, 4)], (0, 2));
        let bct = biconnected_components(&g).unwrap();
        let assignment = locate_agents(&g, &bct).unwrap();
        let view = BlockView::new(&g, &bct.blocks[0], &assignment.blocks[0]).unwrap();
        let tri = view
            .decomp
            .components
            .iter()
            .find(|c| c.kind == ComponentKind::Polygon && c.graph.nodes.contains(&NodeId(4)))
            .unwrap()
            .id;
        let k = classify_split_pair(&view, tri, (NodeId(1), NodeId(3))).unwrap();
        assert_eq!(k.class, CutType::Type2);
        assert_eq!(k.witness.len(), 2);
        assert_eq!(
            classify_component(&view, tri).unwrap(),
            Category::Cat2 {
                pair: (NodeId(1), NodeId(3))
            }
        );
        let r = run_dil2m(&g).unwrap();
        let truth = identifiable_links_bruteforce(&g, &OracleConfig::default()).unwrap();
        assert_eq!(r.identifiable(), truth.identifiable);
        // chord 1-3 is deferred by the triangle and settled elsewhere
        assert_eq!(r.links[4].rule, Cat2DeferredResolved);
    }

    #[test]
    fn virtual_link_replacement() {
        // u=0, v=1, x=2, y=3: links uv, ux, xv, uy, yv
        let block = Graph::build(
            (0..4).map(NodeId),
            &[(0, 1), (0, 2), (2, 1), (0, 3), (3, 1)].map(|(a, b)| (NodeId(a), NodeId(b))),
            None,
        )
        .unwrap();
        let d = triconnected_components(&block).unwrap();
        let poly = d
            .components
            .iter()
            .find(|c| c.graph.nodes.contains(&NodeId(2)))
            .unwrap();
        let v = poly.virtual_links().next().unwrap().id;
        let p = replace_virtual_link(&d, poly.id, v).unwrap();
        assert!(p == vec![NodeId(0), NodeId(1)] || p == vec![NodeId(0), NodeId(3), NodeId(1)]);
        assert!(!p.contains(&NodeId(2)));
        assert_eq!(replace_virtual_link(&d, poly.id, LinkId(0)), Err(Error::NoPath(LinkId(0))));
    }

    #[test]
    fn shortcut_condition() {
        let weak = TriangleSide {
            real_link: false,
            neighbors: 1,
            any_rigid: false,
        };
        let real = TriangleSide {
            real_link: true,
            ..weak
        };
        let rigid = TriangleSide {
            any_rigid: true,
            ..weak
        };
        assert!(!shortcut_identifiable(weak, real));
        assert!(shortcut_identifiable(real, real));
        assert!(shortcut_identifiable(
            TriangleSide {
                neighbors: 2,
                ..weak
            },
            rigid
        ));
    }

    #[test]
    fn wrong_agent_count() {
        let g = graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4), (1, 4)], (0, 2));
        let bct = biconnected_components(&g).unwrap();
        let assignment = locate_agents(&g, &bct).unwrap();
        let leaf = bct.block_of_link(LinkId(3)).unwrap();
        let view = BlockView::new(&g, leaf, assignment.block(leaf.id).unwrap()).unwrap();
        assert_eq!(
            classify_component(&view, 0),
            Err(Error::WrongAgentCount { block: leaf.id, count: 1 })
        );
    }
}
