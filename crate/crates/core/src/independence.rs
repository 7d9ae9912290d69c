//! Separation in regression graphs, anterior graphs and Markov equivalence.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::edge::{induced_connections, partial_closure, EdgeMatrix};
use crate::error::{Error, Result};
use crate::graph::{classify_vs, Edge, EdgeKind, NodeId, NodeSet, RegressionGraph};

/// `α ⫫ β | c`; the remaining nodes `m` are marginalized over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndepQuery {
    pub alpha: NodeSet,
    pub beta: NodeSet,
    pub c: NodeSet,
}

impl IndepQuery {
    pub fn new(alpha: NodeSet, beta: NodeSet, c: NodeSet) -> Result<Self> {
        if alpha.is_empty() || beta.is_empty() {
            return Err(Error::InvalidPartition("α and β must be nonempty".into()));
        }
        if !alpha.is_disjoint(&beta) || !alpha.is_disjoint(&c) || !beta.is_disjoint(&c) {
            return Err(Error::InvalidPartition("α, β and c must be disjoint".into()));
        }
        Ok(IndepQuery { alpha, beta, c })
    }

    /// Convenience constructor from raw labels.
    pub fn of(alpha: &[u32], beta: &[u32], c: &[u32]) -> Result<Self> {
        let s = |v: &[u32]| v.iter().copied().map(NodeId).collect::<NodeSet>();
        Self::new(s(alpha), s(beta), s(c))
    }

    /// `m = N \ (α ∪ β ∪ c)`, after checking that every named node is in `nodes`.
    pub fn margin(&self, nodes: &NodeSet) -> Result<NodeSet> {
        for n in self.alpha.iter().chain(&self.beta).chain(&self.c) {
            if !nodes.contains(n) {
                return Err(Error::InvalidPartition(format!("node {n} is not in the graph")));
            }
        }
        Ok(nodes
            .iter()
            .copied()
            .filter(|n| !self.alpha.contains(n) && !self.beta.contains(n) && !self.c.contains(n))
            .collect())
    }

    /// The marginalized side of the split, `a = α ∪ m`.
    pub fn a_side(&self, nodes: &NodeSet) -> Result<NodeSet> {
        let mut a = self.margin(nodes)?;
        a.extend(self.alpha.iter().copied());
        Ok(a)
    }
}

fn join(s: &NodeSet) -> String {
    s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for IndepQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} _||_ {}", join(&self.alpha), join(&self.beta))?;
        if !self.c.is_empty() {
            write!(f, " | {}", join(&self.c))?;
        }
        Ok(())
    }
}

fn require_valid(graph: &RegressionGraph) -> Result<()> {
    let r = graph.validate();
    if r.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidGraph(r))
    }
}

/// Does the graph imply `α ⫫ β | c`?
///
/// Concentration and covariance graphs use plain reachability (paths avoiding
/// `c`, respectively paths inside `c`); everything else goes through the
/// induced edge matrix for `a = α ∪ m`.
pub fn separated(graph: &RegressionGraph, q: &IndepQuery) -> Result<bool> {
    Separator::new(graph)?.separated(q)
}

/// Answers many queries on one graph, keeping the connection matrix of each
/// marginalized set `a` it has seen.
pub struct Separator<'g> {
    graph: &'g RegressionGraph,
    nodes: NodeSet,
    h: EdgeMatrix,
    w: EdgeMatrix,
    concentration: bool,
    covariance: bool,
    cache: HashMap<NodeSet, EdgeMatrix>,
}

impl<'g> Separator<'g> {
    pub fn new(graph: &'g RegressionGraph) -> Result<Self> {
        require_valid(graph)?;
        Ok(Separator {
            graph,
            nodes: graph.nodes(),
            h: graph.h_matrix(),
            w: graph.w_matrix(),
            concentration: graph.is_concentration_graph(),
            covariance: graph.is_covariance_graph(),
            cache: HashMap::new(),
        })
    }

    pub fn separated(&mut self, q: &IndepQuery) -> Result<bool> {
        let m = q.margin(&self.nodes)?;
        if self.concentration {
            return Ok(!undirected_reach(self.graph, q, |n| !q.c.contains(&n)));
        }
        if self.covariance {
            return Ok(!undirected_reach(self.graph, q, |n| !m.contains(&n)));
        }
        let mut a = m;
        a.extend(q.alpha.iter().copied());
        let conn = match self.cache.entry(a) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let conn = induced_connections(&self.h, &self.w, e.key())?;
                e.insert(conn)
            }
        };
        Ok(no_connection(conn, &q.alpha, &q.beta))
    }
}

// Is there an α–β path whose inner nodes all satisfy `pass`?
fn undirected_reach(graph: &RegressionGraph, q: &IndepQuery, pass: impl Fn(NodeId) -> bool) -> bool {
    let inc = graph.incidence();
    let mut seen: NodeSet = q.alpha.clone();
    let mut stack: Vec<NodeId> = q.alpha.iter().copied().collect();
    while let Some(x) = stack.pop() {
        for e in &inc[&x] {
            let y = e.other(x);
            if q.beta.contains(&y) {
                return true;
            }
            if pass(y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    false
}

/// Reads `[N_a|b]_{α,β}` for `a = α ∪ m`; independence iff it is all zero.
pub fn separated_by_matrix(graph: &RegressionGraph, q: &IndepQuery) -> Result<bool> {
    require_valid(graph)?;
    let a = q.a_side(&graph.nodes())?;
    let conn = induced_connections(&graph.h_matrix(), &graph.w_matrix(), &a)?;
    Ok(no_connection(&conn, &q.alpha, &q.beta))
}

/// True iff no `α × β` entry of a connection matrix is one.
pub fn no_connection(conn: &EdgeMatrix, alpha: &NodeSet, beta: &NodeSet) -> bool {
    alpha.iter().all(|&i| beta.iter().all(|&j| !conn.at(i, j).unwrap_or(false)))
}

/// The a-line anterior graph: every a-line anterior of a node becomes its
/// parent and a-line context paths are closed by full lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnteriorGraph {
    pub base: RegressionGraph,
    pub a: NodeSet,
    pub graph: RegressionGraph,
}

pub fn anterior_graph(graph: &RegressionGraph, a: &NodeSet) -> Result<AnteriorGraph> {
    let k = partial_closure(&graph.h_matrix(), a)?;
    let order = k.order().to_vec();
    let mut edges: Vec<Edge> = graph
        .edges()
        .iter()
        .copied()
        .filter(|e| e.kind == EdgeKind::Dashed)
        .collect();
    for (r, &i) in order.iter().enumerate() {
        for c in k.ones_in_row(r) {
            let j = order[c];
            if c == r {
                continue;
            }
            if !k.get(c, r) {
                edges.push(Edge { kind: EdgeKind::Arrow, i, j });
            } else if r < c {
                edges.push(Edge::full(i.0, j.0));
            }
        }
    }
    Ok(AnteriorGraph {
        base: graph.clone(),
        a: a.clone(),
        graph: RegressionGraph::new_unchecked(graph.blocks().clone(), edges),
    })
}

fn collision_vs(graph: &RegressionGraph) -> Result<BTreeSet<(NodeId, (NodeId, NodeId))>> {
    Ok(classify_vs(graph)?
        .into_iter()
        .filter(|v| v.kind.is_collision())
        .map(|v| (v.inner, v.outer))
        .collect())
}

/// Same nodes, same skeleton, same collision Vs.
pub fn markov_equivalent(g1: &RegressionGraph, g2: &RegressionGraph) -> bool {
    if g1.nodes() != g2.nodes() || g1.skeleton() != g2.skeleton() {
        return false;
    }
    match (collision_vs(g1), collision_vs(g2)) {
        (Ok(c1), Ok(c2)) => c1 == c2,
        _ => false,
    }
}

/// `(i ⫫ j | c and i ⫫ j | c ∪ {h}) ⇒ (i ⫫ h | c or j ⫫ h | c)`, evaluated by [`separated`].
pub fn singleton_transitivity_check(
    graph: &RegressionGraph,
    i: NodeId,
    j: NodeId,
    h: NodeId,
    c: &NodeSet,
) -> Result<bool> {
    if i == j || i == h || j == h || c.contains(&i) || c.contains(&j) || c.contains(&h) {
        return Err(Error::InvalidPartition("i, j, h must be distinct and outside c".into()));
    }
    let one = |x: NodeId| -> NodeSet { [x].into_iter().collect() };
    let mut ch = c.clone();
    ch.insert(h);
    let sep = |x, y, cond: &NodeSet| separated(graph, &IndepQuery::new(one(x), one(y), cond.clone())?);
    let antecedent = sep(i, j, c)? && sep(i, j, &ch)?;
    Ok(!antecedent || sep(i, h, c)? || sep(j, h, c)?)
}
