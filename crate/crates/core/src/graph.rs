//! Regression graphs: ordered response blocks, a context block and three edge kinds.
//!
//! An arrow `i ≺— j` points at `i` and requires `j` to lie in the past of `i`,
//! dashed lines join two nodes of one response block and full lines join two
//! context nodes. Parent graphs, concentration graphs and covariance graphs are
//! the usual special cases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

pub type NodeSet = BTreeSet<NodeId>;

/// Builds a node set from raw labels.
pub fn node_set<I: IntoIterator<Item = u32>>(labels: I) -> NodeSet {
    labels.into_iter().map(NodeId).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// `i ≺— j`: `j` is in the past of `i`.
    Arrow,
    /// `i --- j` within one response block.
    Dashed,
    /// `i — j` within the context block.
    Full,
}

/// An edge. Arrows keep their orientation (`i` is the response, `j` the
/// explanatory node); lines are stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub i: NodeId,
    pub j: NodeId,
}

impl Edge {
    pub fn arrow(response: u32, explanatory: u32) -> Self {
        Edge { kind: EdgeKind::Arrow, i: NodeId(response), j: NodeId(explanatory) }
    }

    pub fn dashed(i: u32, j: u32) -> Self {
        Edge { kind: EdgeKind::Dashed, i: NodeId(i.min(j)), j: NodeId(i.max(j)) }
    }

    pub fn full(i: u32, j: u32) -> Self {
        Edge { kind: EdgeKind::Full, i: NodeId(i.min(j)), j: NodeId(i.max(j)) }
    }

    fn canonical(self) -> Self {
        match self.kind {
            EdgeKind::Arrow => self,
            _ if self.i > self.j => Edge { kind: self.kind, i: self.j, j: self.i },
            _ => self,
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.i == n || self.j == n
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if self.i == n {
            self.j
        } else {
            self.i
        }
    }

    /// The kind of edge end sitting at `n`.
    pub fn end_at(&self, n: NodeId) -> EndMark {
        match self.kind {
            EdgeKind::Arrow if self.i == n => EndMark::Head,
            EdgeKind::Arrow => EndMark::Tail,
            EdgeKind::Dashed => EndMark::Dashed,
            EdgeKind::Full => EndMark::Full,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EdgeKind::Arrow => write!(f, "{}≺—{}", self.i, self.j),
            EdgeKind::Dashed => write!(f, "{}---{}", self.i, self.j),
            EdgeKind::Full => write!(f, "{}—{}", self.i, self.j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndMark {
    Head,
    Tail,
    Dashed,
    Full,
}

impl EndMark {
    /// Arrowheads and dashed ends make a node a collision node.
    pub fn is_collision_end(self) -> bool {
        matches!(self, EndMark::Head | EndMark::Dashed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlockStructure {
    /// `g_1, …, g_K`; `g_1` holds the primary responses.
    pub responses: Vec<NodeSet>,
    pub context: NodeSet,
}

impl BlockStructure {
    pub fn new(responses: Vec<NodeSet>, context: NodeSet) -> Self {
        BlockStructure { responses, context }
    }

    /// Singleton blocks `{order[0]}, …, {order[d-1]}` and an empty context.
    pub fn parent_order(order: &[u32]) -> Self {
        BlockStructure {
            responses: order.iter().map(|&v| node_set([v])).collect(),
            context: NodeSet::new(),
        }
    }

    /// Nodes in declared order: `g_1, …, g_K, v`, ascending within each block.
    pub fn order(&self) -> Vec<NodeId> {
        self.responses
            .iter()
            .chain(std::iter::once(&self.context))
            .flat_map(|b| b.iter().copied())
            .collect()
    }

    pub fn nodes(&self) -> NodeSet {
        self.order().into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyResponseBlock(usize),
    NodeInSeveralBlocks(NodeId),
    UnknownEndpoint(Edge),
    SelfLoop(Edge),
    DuplicatePair(NodeId, NodeId),
    DashedCrossesBlock(Edge),
    FullOutsideContext(Edge),
    ArrowIntoPast(Edge),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyResponseBlock(k) => write!(f, "response block g{} is empty", k + 1),
            Violation::NodeInSeveralBlocks(n) => write!(f, "node {n} appears in several blocks"),
            Violation::UnknownEndpoint(e) => write!(f, "edge {e} has an endpoint outside the blocks"),
            Violation::SelfLoop(e) => write!(f, "self-loop {e}"),
            Violation::DuplicatePair(i, j) => write!(f, "more than one edge between {i} and {j}"),
            Violation::DashedCrossesBlock(e) => write!(f, "dashed edge crosses block boundary: {e}"),
            Violation::FullOutsideContext(e) => write!(f, "full edge outside the context block: {e}"),
            Violation::ArrowIntoPast(e) => write!(f, "arrow points into the past: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressionGraph {
    blocks: BlockStructure,
    edges: Vec<Edge>,
    // block position of each node; context is `responses.len()`
    block_of: BTreeMap<NodeId, usize>,
}

impl RegressionGraph {
    /// Builds and validates a graph.
    pub fn new(blocks: BlockStructure, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let g = Self::new_unchecked(blocks, edges);
        let report = g.validate();
        if report.is_valid() {
            Ok(g)
        } else {
            Err(Error::InvalidGraph(report))
        }
    }

    /// Builds a graph without checking it; pair with [`RegressionGraph::validate`].
    pub fn new_unchecked(blocks: BlockStructure, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut block_of = BTreeMap::new();
        for (k, b) in blocks.responses.iter().enumerate() {
            for &n in b {
                block_of.entry(n).or_insert(k);
            }
        }
        let kc = blocks.responses.len();
        for &n in &blocks.context {
            block_of.entry(n).or_insert(kc);
        }
        let mut edges: Vec<Edge> = edges.into_iter().map(Edge::canonical).collect();
        edges.sort();
        edges.dedup();
        RegressionGraph { blocks, edges, block_of }
    }

    /// Parent graph over `order` (first entry is the primary response).
    pub fn parent_graph(order: &[u32], arrows: &[(u32, u32)]) -> Result<Self> {
        Self::new(
            BlockStructure::parent_order(order),
            arrows.iter().map(|&(i, j)| Edge::arrow(i, j)),
        )
    }

    /// Concentration graph on `1..=d`.
    pub fn concentration(d: u32, lines: &[(u32, u32)]) -> Result<Self> {
        Self::new(
            BlockStructure::new(vec![], node_set(1..=d)),
            lines.iter().map(|&(i, j)| Edge::full(i, j)),
        )
    }

    /// Covariance graph on `1..=d`.
    pub fn covariance(d: u32, lines: &[(u32, u32)]) -> Result<Self> {
        let responses = if d == 0 { vec![] } else { vec![node_set(1..=d)] };
        Self::new(
            BlockStructure::new(responses, NodeSet::new()),
            lines.iter().map(|&(i, j)| Edge::dashed(i, j)),
        )
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (k, b) in self.blocks.responses.iter().enumerate() {
            if b.is_empty() {
                violations.push(Violation::EmptyResponseBlock(k));
            }
        }
        let mut seen = NodeSet::new();
        for n in self.blocks.order() {
            if !seen.insert(n) {
                violations.push(Violation::NodeInSeveralBlocks(n));
            }
        }
        let mut pairs = BTreeSet::new();
        for &e in &self.edges {
            if e.i == e.j {
                violations.push(Violation::SelfLoop(e));
                continue;
            }
            let (Some(&bi), Some(&bj)) = (self.block_of.get(&e.i), self.block_of.get(&e.j)) else {
                violations.push(Violation::UnknownEndpoint(e));
                continue;
            };
            if !pairs.insert((e.i.min(e.j), e.i.max(e.j))) {
                violations.push(Violation::DuplicatePair(e.i.min(e.j), e.i.max(e.j)));
            }
            let kc = self.blocks.responses.len();
            match e.kind {
                EdgeKind::Dashed if bi != bj || bi == kc => {
                    violations.push(Violation::DashedCrossesBlock(e))
                }
                EdgeKind::Full if bi != kc || bj != kc => {
                    violations.push(Violation::FullOutsideContext(e))
                }
                EdgeKind::Arrow if bi >= bj || bi == kc => violations.push(Violation::ArrowIntoPast(e)),
                _ => {}
            }
        }
        ValidationReport { violations }
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    /// Edges in canonical sorted order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> NodeSet {
        self.block_of.keys().copied().collect()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.block_of.contains_key(&n)
    }

    pub fn node_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn order(&self) -> Vec<NodeId> {
        self.blocks.order()
    }

    /// Index of the block holding `n`: `0..K` for responses, `K` for the context.
    pub fn block_index(&self, n: NodeId) -> Option<usize> {
        self.block_of.get(&n).copied()
    }

    pub fn is_context(&self, n: NodeId) -> bool {
        self.block_index(n) == Some(self.blocks.responses.len())
    }

    /// Nodes of all blocks after the one holding `n`.
    pub fn past(&self, n: NodeId) -> Result<NodeSet> {
        let k = self.block_index(n).ok_or(Error::UnknownNode(n))?;
        Ok(self
            .block_of
            .iter()
            .filter(|(_, &b)| b > k)
            .map(|(&m, _)| m)
            .collect())
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<Edge> {
        self.edges
            .iter()
            .copied()
            .find(|e| (e.i == a && e.j == b) || (e.i == b && e.j == a))
    }

    /// Edges incident to each node.
    pub fn incidence(&self) -> BTreeMap<NodeId, Vec<Edge>> {
        let mut inc: BTreeMap<NodeId, Vec<Edge>> =
            self.block_of.keys().map(|&n| (n, Vec::new())).collect();
        for &e in &self.edges {
            inc.entry(e.i).or_default().push(e);
            inc.entry(e.j).or_default().push(e);
        }
        inc
    }

    /// Unordered node pairs carrying an edge.
    pub fn skeleton(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges.iter().map(|e| (e.i.min(e.j), e.i.max(e.j))).collect()
    }

    /// Singleton response blocks, at most one context node, arrows only.
    pub fn is_parent_graph(&self) -> bool {
        self.blocks.responses.iter().all(|b| b.len() == 1)
            && self.blocks.context.len() <= 1
            && self.edges.iter().all(|e| e.kind == EdgeKind::Arrow)
    }

    pub fn is_concentration_graph(&self) -> bool {
        self.blocks.responses.is_empty() && self.edges.iter().all(|e| e.kind == EdgeKind::Full)
    }

    pub fn is_covariance_graph(&self) -> bool {
        self.blocks.responses.len() <= 1
            && self.blocks.context.is_empty()
            && self.edges.iter().all(|e| e.kind == EdgeKind::Dashed)
    }

    /// Parents of `n`: the explanatory ends of arrows pointing at `n`.
    pub fn parents(&self, n: NodeId) -> NodeSet {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Arrow && e.i == n)
            .map(|e| e.j)
            .collect()
    }

    pub fn subgraph(&self, keep: &NodeSet) -> Result<RegressionGraph> {
        if let Some(&n) = keep.iter().find(|n| !self.contains(**n)) {
            return Err(Error::UnknownNode(n));
        }
        let responses = self
            .blocks
            .responses
            .iter()
            .map(|b| b.intersection(keep).copied().collect::<NodeSet>())
            .filter(|b| !b.is_empty())
            .collect();
        let context = self.blocks.context.intersection(keep).copied().collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|e| keep.contains(&e.i) && keep.contains(&e.j));
        Ok(RegressionGraph::new_unchecked(BlockStructure::new(responses, context), edges))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VKind {
    Source,
    Transition,
    Sink,
    Collision,
    Transmitting,
}

impl VKind {
    pub fn is_collision(self) -> bool {
        matches!(self, VKind::Sink | VKind::Collision)
    }
}

/// A V: two edges sharing `inner`, with the outer nodes not coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VClass {
    pub inner: NodeId,
    pub outer: (NodeId, NodeId),
    pub kind: VKind,
}

fn v_kind(e1: &Edge, e2: &Edge, inner: NodeId) -> VKind {
    let (m1, m2) = (e1.end_at(inner), e2.end_at(inner));
    if e1.kind == EdgeKind::Arrow && e2.kind == EdgeKind::Arrow {
        match (m1, m2) {
            (EndMark::Head, EndMark::Head) => VKind::Sink,
            (EndMark::Tail, EndMark::Tail) => VKind::Source,
            _ => VKind::Transition,
        }
    } else if m1.is_collision_end() && m2.is_collision_end() {
        VKind::Collision
    } else {
        VKind::Transmitting
    }
}

/// Every V of the graph, sorted by inner node then outer pair.
pub fn classify_vs(graph: &RegressionGraph) -> Result<Vec<VClass>> {
    let report = graph.validate();
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report));
    }
    let skeleton = graph.skeleton();
    let mut out = Vec::new();
    for (inner, inc) in graph.incidence() {
        for (x, e1) in inc.iter().enumerate() {
            for e2 in &inc[x + 1..] {
                let (p, q) = (e1.other(inner), e2.other(inner));
                let (p, q, e1, e2) = if p < q { (p, q, e1, e2) } else { (q, p, e2, e1) };
                if skeleton.contains(&(p, q)) {
                    continue;
                }
                out.push(VClass { inner, outer: (p, q), kind: v_kind(e1, e2, inner) });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Random valid regression graph on `1..=d` with shuffled declared order.
///
/// Block sizes are drawn at random, the last block becomes the context with
/// probability one half, and each pair is joined with probability `density`
/// by the one edge kind its blocks allow.
pub fn random_regression_graph<R: Rng + ?Sized>(rng: &mut R, d: u32, density: f64) -> RegressionGraph {
    let mut labels: Vec<u32> = (1..=d).collect();
    labels.shuffle(rng);
    let mut blocks: Vec<NodeSet> = Vec::new();
    let mut cur = NodeSet::new();
    for (k, &l) in labels.iter().enumerate() {
        cur.insert(NodeId(l));
        if k + 1 == labels.len() || rng.gen_bool(0.5) {
            blocks.push(std::mem::take(&mut cur));
        }
    }
    let context = if !blocks.is_empty() && rng.gen_bool(0.5) {
        blocks.pop().unwrap_or_default()
    } else {
        NodeSet::new()
    };
    let structure = BlockStructure::new(blocks, context);
    let g = RegressionGraph::new_unchecked(structure.clone(), []);
    let order = structure.order();
    let mut edges = Vec::new();
    for (x, &p) in order.iter().enumerate() {
        for &q in &order[x + 1..] {
            if !rng.gen_bool(density) {
                continue;
            }
            let (bp, bq) = (g.block_index(p), g.block_index(q));
            let e = if bp != bq {
                Edge { kind: EdgeKind::Arrow, i: p, j: q }
            } else if g.is_context(p) {
                Edge::full(p.0, q.0)
            } else {
                Edge::dashed(p.0, q.0)
            };
            edges.push(e);
        }
    }
    RegressionGraph::new_unchecked(structure, edges)
}

/// Random parent graph on `1..=d` in the natural order.
pub fn random_parent_graph<R: Rng + ?Sized>(rng: &mut R, d: u32, density: f64) -> RegressionGraph {
    let order: Vec<u32> = (1..=d).collect();
    let mut arrows = Vec::new();
    for i in 1..=d {
        for j in i + 1..=d {
            if rng.gen_bool(density) {
                arrows.push(Edge::arrow(i, j));
            }
        }
    }
    RegressionGraph::new_unchecked(BlockStructure::parent_order(&order), arrows)
}
