//! Graphviz DOT export of verdicts and decompositions.

use std::fmt::Write;

use crate::decomposition::{BlockCutTree, TriconnectedDecomposition};
use crate::dil2m::{IdentifiabilityReport, Verdict};
use crate::graph::{Graph, LinkKind};

/// Identifiable links green, unidentifiable red, rule tags as labels.
/// Monitors are drawn as double circles.
pub fn verdict_dot(g: &Graph, report: &IdentifiabilityReport) -> String {
    let mut out = String::from("graph verdicts {\n  node [shape=circle];\n");
    for &v in g.nodes() {
        let shape = if g.is_monitor(v) { " [shape=doublecircle]" } else { "" };
        writeln!(out, "  {v}{shape};").unwrap();
    }
    for lv in &report.links {
        let color = match lv.verdict {
            Verdict::Identifiable => "green",
            Verdict::Unidentifiable => "red",
        };
        writeln!(
            out,
            "  {} -- {} [color={color}, label=\"{}\"];",
            lv.ends.0,
            lv.ends.1,
            lv.rule.tag()
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// Blocks as boxes, cut vertices as circles.
pub fn block_cut_tree_dot(bct: &BlockCutTree) -> String {
    let mut out = String::from("graph block_cut_tree {\n");
    for b in &bct.blocks {
        let nodes: Vec<String> = b.nodes.iter().map(|v| v.to_string()).collect();
        writeln!(out, "  b{} [shape=box, label=\"B{} {{{}}}\"];", b.id, b.id, nodes.join(",")).unwrap();
    }
    for v in &bct.cut_vertices {
        writeln!(out, "  c{v} [shape=circle, label=\"{v}\"];").unwrap();
    }
    for (b, v) in &bct.adjacency {
        writeln!(out, "  b{b} -- c{v};").unwrap();
    }
    out.push_str("}\n");
    out
}

/// One cluster per triconnected component; virtual links are dashed and
/// labelled with their id so paired copies can be matched up.
pub fn decomposition_dot(d: &TriconnectedDecomposition) -> String {
    let mut out = String::from("graph triconnected {\n  node [shape=circle];\n");
    for c in &d.components {
        writeln!(out, "  subgraph cluster_{} {{", c.id).unwrap();
        writeln!(out, "    label=\"{} {:?}\";", c.id, c.kind).unwrap();
        for v in &c.graph.nodes {
            writeln!(out, "    t{}_{v} [label=\"{v}\"];", c.id).unwrap();
        }
        for l in &c.graph.links {
            let style = match l.kind {
                LinkKind::Real => String::new(),
                LinkKind::Virtual => format!(" [style=dashed, label=\"v{}\"]", l.id.0),
            };
            writeln!(out, "    t{0}_{1} -- t{0}_{2}{style};", c.id, l.ends.0, l.ends.1).unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Mirror of the decomposition's fields.
pub fn decomposition_json(d: &TriconnectedDecomposition) -> serde_json::Value {
    serde_json::to_value(d).expect("plain data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{biconnected_components, triconnected_components};
    use crate::dil2m::run_dil2m;
    use crate::graph::NodeId;

    fn graph(n: u32, edges: &[(u32, u32)], mon: Option<(u32, u32)>) -> Graph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        Graph::build((0..n).map(NodeId), &e, mon.map(|(a, b)| (NodeId(a), NodeId(b)))).unwrap()
    }

    #[test]
    fn triangle_verdict_colors() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)], Some((0, 1)));
        let dot = verdict_dot(&g, &run_dil2m(&g).unwrap());
        assert!(dot.starts_with("graph verdicts {"));
        assert_eq!(dot.matches("color=green").count(), 1);
        assert_eq!(dot.matches("color=red").count(), 2);
        assert!(dot.contains("0 [shape=doublecircle]"));
        assert!(dot.contains("label=\"Lemma1-direct\""));
    }

    #[test]
    fn bowtie_tree() {
        let g = graph(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)], None);
        let dot = block_cut_tree_dot(&biconnected_components(&g).unwrap());
        assert!(dot.contains("c2 [shape=circle"));
        assert_eq!(dot.matches(" -- c2;").count(), 2);
    }

    #[test]
    fn virtual_links_dashed() {
        // two triangles sharing link 0-1: polygon, polygon, bond
        let g = graph(4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)], None);
        let d = triconnected_components(&g).unwrap();
        let dot = decomposition_dot(&d);
        let virtuals: usize = d.components.iter().map(|c| c.virtual_links().count()).sum();
        assert_eq!(dot.matches("style=dashed").count(), virtuals);
        assert!(virtuals > 0);
        let json = decomposition_json(&d);
        assert_eq!(json["components"].as_array().unwrap().len(), d.components.len());
        assert!(json.get("virtual_pairing").is_some() && json.get("split_pairs").is_some());
    }
}
