//! Naive checkers used to validate the engine.
//!
//! Everything here walks simple paths one by one. It is exponential and
//! only meant for small graphs in tests; graphs above [`MAX_NODES`] are
//! rejected by assertion.

use std::fmt;

use crate::edge::EdgeMatrix;
use crate::error::{Error, Result};
use crate::graph::{BlockStructure, Edge, EdgeKind, EndMark, NodeId, NodeSet, RegressionGraph};
use crate::independence::IndepQuery;

pub const MAX_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Collision,
    Transmitting,
}

/// A simple path with the role of each inner node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWitness {
    pub nodes: Vec<NodeId>,
    pub roles: Vec<Role>,
}

impl fmt::Display for PathWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", ns.join(" ~ "))
    }
}

// adjacency over node positions: (neighbour, end at self, end at neighbour)
type Adjacency = Vec<Vec<(usize, EndMark, EndMark)>>;

fn adjacency(order: &[NodeId], edges: &[Edge]) -> Adjacency {
    let pos = |n: NodeId| order.iter().position(|&x| x == n).unwrap();
    let mut adj = vec![Vec::new(); order.len()];
    for e in edges {
        let (p, q) = (pos(e.i), pos(e.j));
        adj[p].push((q, e.end_at(e.i), e.end_at(e.j)));
        adj[q].push((p, e.end_at(e.j), e.end_at(e.i)));
    }
    adj
}

fn role(into: EndMark, out: EndMark) -> Role {
    if into.is_collision_end() && out.is_collision_end() {
        Role::Collision
    } else {
        Role::Transmitting
    }
}

/// All simple paths from `i` to `j` with at most `max_len` edges.
pub fn enumerate_paths(graph: &RegressionGraph, i: NodeId, j: NodeId, max_len: usize) -> Result<Vec<PathWitness>> {
    let order = graph.order();
    assert!(order.len() <= MAX_NODES, "oracle is limited to {MAX_NODES} nodes");
    let pi = order.iter().position(|&x| x == i).ok_or(Error::UnknownNode(i))?;
    let pj = order.iter().position(|&x| x == j).ok_or(Error::UnknownNode(j))?;
    let adj = adjacency(&order, graph.edges());
    let mut out = Vec::new();
    let mut path = vec![pi];
    let mut ends: Vec<(EndMark, EndMark)> = Vec::new();
    fn walk(
        adj: &Adjacency,
        target: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        ends: &mut Vec<(EndMark, EndMark)>,
        out: &mut Vec<(Vec<usize>, Vec<Role>)>,
    ) {
        let x = *path.last().unwrap();
        if x == target {
            let roles = (1..path.len() - 1).map(|k| role(ends[k - 1].1, ends[k].0)).collect();
            out.push((path.clone(), roles));
            return;
        }
        if path.len() > max_len {
            return;
        }
        for &(y, ex, ey) in &adj[x] {
            if path.contains(&y) {
                continue;
            }
            path.push(y);
            ends.push((ex, ey));
            walk(adj, target, max_len, path, ends, out);
            path.pop();
            ends.pop();
        }
    }
    if pi != pj {
        let mut raw = Vec::new();
        walk(&adj, pj, max_len, &mut path, &mut ends, &mut raw);
        out = raw
            .into_iter()
            .map(|(p, roles)| PathWitness {
                nodes: p.into_iter().map(|k| order[k]).collect(),
                roles,
            })
            .collect();
    }
    Ok(out)
}

/// Closure by walking: `ij` is one when `M` has it or a chain
/// `i → k_1 → … → k_r → j` of ones in `M` has every `k` in `a`.
pub fn closure_by_paths(m: &EdgeMatrix, a: &NodeSet) -> Result<EdgeMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("square matrix expected".into()));
    }
    let n = m.nrows();
    assert!(n <= MAX_NODES, "oracle is limited to {MAX_NODES} nodes");
    if let Some(&x) = a.iter().find(|&&x| m.row_position(x).is_none()) {
        return Err(Error::UnknownNode(x));
    }
    let in_a: Vec<bool> = m.order().iter().map(|x| a.contains(x)).collect();
    let mut out = m.clone();
    fn walk(m: &EdgeMatrix, in_a: &[bool], start: usize, x: usize, seen: &mut Vec<bool>, out: &mut EdgeMatrix) {
        for y in 0..m.ncols() {
            if y == x || !m.get(x, y) {
                continue;
            }
            out.set(start, y, true);
            if in_a[y] && !seen[y] {
                seen[y] = true;
                walk(m, in_a, start, y, seen, out);
                seen[y] = false;
            }
        }
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        seen[i] = true;
        for k in 0..n {
            if k != i && in_a[k] && m.get(i, k) {
                seen[k] = true;
                walk(m, &in_a, i, k, &mut seen, &mut out);
                seen[k] = false;
            }
        }
    }
    Ok(out)
}

/// Path criterion on the graph itself: a path between `α` and `β` is active
/// when every inner collision node is an anterior of `c` (or in `c`) and
/// every other inner node is outside `c`.
pub struct PathOracle {
    order: Vec<NodeId>,
    adj: Adjacency,
    // anteriors[k]: positions with an anterior path to position k, k included
    anteriors: Vec<u32>,
}

impl PathOracle {
    pub fn new(graph: &RegressionGraph) -> Self {
        let order = graph.order();
        assert!(order.len() <= MAX_NODES, "oracle is limited to {MAX_NODES} nodes");
        let adj = adjacency(&order, graph.edges());
        let anteriors = (0..order.len())
            .map(|k| {
                let mut ant = 1u32 << k;
                let mut stack = vec![k];
                while let Some(x) = stack.pop() {
                    // step to j for x ≺— j, or along a full line
                    for &(y, ex, _) in &adj[x] {
                        if matches!(ex, EndMark::Head | EndMark::Full) && ant >> y & 1 == 0 {
                            ant |= 1 << y;
                            stack.push(y);
                        }
                    }
                }
                ant
            })
            .collect();
        PathOracle { order, adj, anteriors }
    }

    /// First active path from `α` to `β`, if any.
    pub fn active_path(&self, q: &IndepQuery) -> Result<Option<PathWitness>> {
        let (alpha, beta, c) = (mask(&self.order, &q.alpha)?, mask(&self.order, &q.beta)?, mask(&self.order, &q.c)?);
        let mut open_collision = 0;
        for k in (0..self.order.len()).filter(|&k| c >> k & 1 == 1) {
            open_collision |= self.anteriors[k];
        }
        let walk = Walk { adj: &self.adj, beta, open_collision, open_transmitting: !c };
        Ok(walk.first_from(alpha).map(|(path, roles)| witness(&self.order, path, roles)))
    }
}

fn mask(order: &[NodeId], s: &NodeSet) -> Result<u32> {
    s.iter().try_fold(0u32, |acc, n| match order.iter().position(|x| x == n) {
        Some(k) => Ok(acc | 1 << k),
        None => Err(Error::InvalidPartition(format!("node {n} is not in the graph"))),
    })
}

fn witness(order: &[NodeId], path: Vec<usize>, roles: Vec<Role>) -> PathWitness {
    PathWitness { nodes: path.into_iter().map(|k| order[k]).collect(), roles }
}

/// The literal walk on the a-line anterior graph for a fixed `a`: every
/// a-line anterior of a node becomes its parent, a-line context paths are
/// closed, dashed lines are kept, and a path is active unless a collision
/// node lies in `m` or a transmitting node lies in `c`.
///
/// This agrees with [`PathOracle`] when the graph has no dashed lines. With
/// dashed lines it can miss a collision node in `m` that is an anterior of
/// `c`: for `1 ≺— 2`, `2 --- 3`, `2 --- 4` it accepts `3 ⫫ 4 | 1`.
pub struct AnteriorGraphWalk {
    order: Vec<NodeId>,
    a: u32,
    adj: Adjacency,
}

impl AnteriorGraphWalk {
    pub fn new(graph: &RegressionGraph, a: &NodeSet) -> Result<Self> {
        let order = graph.order();
        assert!(order.len() <= MAX_NODES, "oracle is limited to {MAX_NODES} nodes");
        let k = closure_by_paths(&graph.h_matrix(), a)?;
        let mut edges: Vec<Edge> = graph
            .edges()
            .iter()
            .copied()
            .filter(|e| e.kind == EdgeKind::Dashed)
            .collect();
        for r in 0..order.len() {
            for c in 0..order.len() {
                if r == c || !k.get(r, c) {
                    continue;
                }
                if !k.get(c, r) {
                    edges.push(Edge { kind: EdgeKind::Arrow, i: order[r], j: order[c] });
                } else if r < c {
                    edges.push(Edge { kind: EdgeKind::Full, i: order[r], j: order[c] });
                }
            }
        }
        let adj = adjacency(&order, &edges);
        Ok(AnteriorGraphWalk { a: mask(&order, a)?, order, adj })
    }

    /// First unblocked path from `α` to `β`, if any. `q` must split as `a = α ∪ m`.
    pub fn active_path(&self, q: &IndepQuery) -> Result<Option<PathWitness>> {
        let (alpha, beta, c) = (mask(&self.order, &q.alpha)?, mask(&self.order, &q.beta)?, mask(&self.order, &q.c)?);
        let all = (1u32 << self.order.len()) - 1;
        if all & !(beta | c) != self.a {
            return Err(Error::InvalidPartition(format!("query {q} does not match this walk's margin")));
        }
        let m = self.a & !alpha;
        let walk = Walk { adj: &self.adj, beta, open_collision: !m, open_transmitting: !c };
        Ok(walk.first_from(alpha).map(|(path, roles)| witness(&self.order, path, roles)))
    }
}

// Depth-first search over simple paths; a prefix whose newest inner node
// blocks is never extended. Node sets are bitmasks over positions.
struct Walk<'w> {
    adj: &'w Adjacency,
    beta: u32,
    open_collision: u32,
    open_transmitting: u32,
}

impl Walk<'_> {
    fn first_from(&self, alpha: u32) -> Option<(Vec<usize>, Vec<Role>)> {
        let n = self.adj.len();
        let mut path = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        let mut roles = Vec::with_capacity(n);
        for s in (0..n).filter(|&s| alpha >> s & 1 == 1) {
            path.clear();
            path.push(s);
            if self.extend(&mut path, 1 << s, &mut ends, &mut roles) {
                return Some((path, roles));
            }
        }
        None
    }

    fn extend(&self, path: &mut Vec<usize>, on_path: u32, ends: &mut Vec<EndMark>, roles: &mut Vec<Role>) -> bool {
        let x = *path.last().unwrap();
        for &(y, ex, ey) in &self.adj[x] {
            if on_path >> y & 1 == 1 {
                continue;
            }
            if path.len() >= 2 {
                let r = role(*ends.last().unwrap(), ex);
                let open = match r {
                    Role::Collision => self.open_collision,
                    Role::Transmitting => self.open_transmitting,
                };
                if open >> x & 1 == 0 {
                    continue;
                }
                roles.push(r);
            }
            path.push(y);
            ends.push(ey);
            if self.beta >> y & 1 == 1 || self.extend(path, on_path | 1 << y, ends, roles) {
                return true;
            }
            path.pop();
            ends.pop();
            if path.len() >= 2 {
                roles.pop();
            }
        }
        false
    }
}

/// The path criterion: no active path between `α` and `β`.
pub fn separated_by_paths(graph: &RegressionGraph, q: &IndepQuery) -> Result<bool> {
    Ok(PathOracle::new(graph).active_path(q)?.is_none())
}

/// An active path witnessing dependence, if the graph has one.
pub fn find_active_path(graph: &RegressionGraph, q: &IndepQuery) -> Result<Option<PathWitness>> {
    PathOracle::new(graph).active_path(q)
}

/// The literal walk on the a-line anterior graph, `a = α ∪ m`.
pub fn separated_in_anterior_graph(graph: &RegressionGraph, q: &IndepQuery) -> Result<bool> {
    let a = q.a_side(&graph.nodes())?;
    Ok(AnteriorGraphWalk::new(graph, &a)?.active_path(q)?.is_none())
}

/// Every regression graph on `1..=d` whose blocks are runs of consecutive
/// labels: each composition of `d` into blocks, the last block either a
/// response block or the context, and each node pair either joined by the one
/// edge kind its blocks allow or not joined. Every regression graph is one of
/// these up to relabeling.
pub fn all_regression_graphs(d: u32) -> impl Iterator<Item = RegressionGraph> {
    let structures = block_structures(d);
    let pairs: Vec<(u32, u32)> = (1..=d).flat_map(|i| (i + 1..=d).map(move |j| (i, j))).collect();
    structures.into_iter().flat_map(move |bs| {
        let pairs = pairs.clone();
        let plain = RegressionGraph::new_unchecked(bs.clone(), []);
        (0u64..1 << pairs.len()).map(move |mask| {
            let edges = pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &(i, j))| {
                let (bi, bj) = (plain.block_index(NodeId(i)), plain.block_index(NodeId(j)));
                if bi != bj {
                    Edge::arrow(i, j)
                } else if plain.is_context(NodeId(i)) {
                    Edge::full(i, j)
                } else {
                    Edge::dashed(i, j)
                }
            });
            RegressionGraph::new_unchecked(bs.clone(), edges.collect::<Vec<_>>())
        })
    })
}

fn block_structures(d: u32) -> Vec<BlockStructure> {
    if d == 0 {
        return vec![BlockStructure::default()];
    }
    let mut out = Vec::new();
    for cuts in 0u32..1 << (d - 1) {
        let mut blocks: Vec<NodeSet> = vec![NodeSet::new()];
        for v in 1..=d {
            blocks.last_mut().unwrap().insert(NodeId(v));
            if v < d && cuts >> (v - 1) & 1 == 1 {
                blocks.push(NodeSet::new());
            }
        }
        out.push(BlockStructure::new(blocks.clone(), NodeSet::new()));
        let context = blocks.pop().unwrap();
        out.push(BlockStructure::new(blocks, context));
    }
    out
}
