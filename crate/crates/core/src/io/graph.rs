use std::fmt::Write;

use crate::ranking::RankingGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph of the Hasse diagram. An edge `a -> b` means `b` is better.
pub fn export_graph(graph: &RankingGraph, ids: &[String]) -> String {
    let mut out = String::from("digraph ranking {\n");
    for &n in &graph.nodes {
        let _ = writeln!(out, "  {};", quote(&ids[n]));
    }
    for &(a, b) in &graph.hasse {
        let _ = writeln!(out, "  {} -> {};", quote(&ids[a]), quote(&ids[b]));
    }
    out.push_str("}\n");
    out
}
