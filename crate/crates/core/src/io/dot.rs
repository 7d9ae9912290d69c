//! DOT output. An arrow `i ≺— j` is drawn `j -> i`.

use std::fmt::Write;

use crate::edge::{EdgeMatrix, InducedEdgeSet};
use crate::graph::{EdgeKind, NodeId, RegressionGraph};

const DASHED: &str = " [dir=none, style=dashed]";
const FULL: &str = " [dir=none]";

fn render(name: &str, nodes: &[NodeId], mut lines: Vec<String>) -> String {
    lines.sort();
    let mut out = format!("digraph {name} {{\n");
    for n in nodes {
        let _ = writeln!(out, "  {n};");
    }
    for l in lines {
        let _ = writeln!(out, "  {l};");
    }
    out.push_str("}\n");
    out
}

pub fn emit_dot(graph: &RegressionGraph) -> String {
    let nodes: Vec<NodeId> = graph.nodes().into_iter().collect();
    let lines = graph
        .edges()
        .iter()
        .map(|e| match e.kind {
            EdgeKind::Arrow => format!("{} -> {}", e.j, e.i),
            EdgeKind::Dashed => format!("{} -> {}{DASHED}", e.i, e.j),
            EdgeKind::Full => format!("{} -> {}{FULL}", e.i, e.j),
        })
        .collect();
    render("G", &nodes, lines)
}

fn symmetric_lines(m: &EdgeMatrix, style: &str, out: &mut Vec<String>) {
    let labels = m.row_labels();
    for r in 0..m.nrows() {
        for c in r + 1..m.ncols() {
            if m.get(r, c) {
                out.push(format!("{} -> {}{style}", labels[r], labels[c]));
            }
        }
    }
}

/// Dashed lines within `a`, arrows from `b` into `a`, full lines within `b`.
pub fn emit_dot_induced(set: &InducedEdgeSet) -> String {
    let mut nodes: Vec<NodeId> = set.a.iter().chain(&set.b).copied().collect();
    nodes.sort();
    let mut lines = Vec::new();
    symmetric_lines(&set.cov_aa_given_b, DASHED, &mut lines);
    symmetric_lines(&set.con_bb, FULL, &mut lines);
    let m = &set.arrows_a_given_b;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m.get(r, c) {
                lines.push(format!("{} -> {}", m.col_labels()[c], m.row_labels()[r]));
            }
        }
    }
    render("induced", &nodes, lines)
}

/// An undirected graph given by a symmetric edge matrix.
pub fn emit_dot_undirected(m: &EdgeMatrix, dashed: bool) -> String {
    let mut lines = Vec::new();
    symmetric_lines(m, if dashed { DASHED } else { FULL }, &mut lines);
    render("G", m.row_labels(), lines)
}
