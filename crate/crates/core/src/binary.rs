//! Symmetric binary distributions generated over parent graphs with main
//! effects only.
//!
//! Each node `i` has levels `±1` and conditional probability
//! `π_{x_i | past} = ½ (1 + Σ_j η_ij x_i x_j)`, `j` ranging over the parents.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::RealMatrix;
use crate::graph::{NodeId, NodeSet, RegressionGraph};
use crate::independence::IndepQuery;

/// Probabilities and factorization checks use this tolerance.
pub const PROB_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SymBinaryModel {
    pub graph: RegressionGraph,
    /// `η_ij` keyed `(i, j)`, `j` a parent of `i`. Missing keys are zero.
    pub eta: BTreeMap<(NodeId, NodeId), f64>,
}

impl SymBinaryModel {
    /// Checks that `graph` is a parent graph and that every nonzero `η` sits
    /// on one of its arrows.
    pub fn new(graph: RegressionGraph, eta: BTreeMap<(NodeId, NodeId), f64>) -> Result<Self> {
        if !graph.is_parent_graph() {
            return Err(Error::NotRealizable("binary models are generated over parent graphs".into()));
        }
        for (&(i, j), &x) in &eta {
            if !graph.contains(i) {
                return Err(Error::UnknownNode(i));
            }
            if !graph.contains(j) {
                return Err(Error::UnknownNode(j));
            }
            if x != 0.0 && !graph.parents(i).contains(&j) {
                return Err(Error::NotRealizable(format!("η_{i}{j} = {x} but {j} is not a parent of {i}")));
            }
        }
        let eta = eta.into_iter().filter(|&(_, x)| x != 0.0).collect();
        Ok(SymBinaryModel { graph, eta })
    }

    pub fn eta(&self, i: NodeId, j: NodeId) -> f64 {
        self.eta.get(&(i, j)).copied().unwrap_or(0.0)
    }
}

/// Random `η` at every arrow with absolute value in `[0.2, 0.9]`, scaled per
/// node so that `Σ_j |η_ij| ≤ 0.95` and every conditional stays in `(0, 1)`.
pub fn sample_model(graph: &RegressionGraph, seed: u64) -> Result<SymBinaryModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eta = BTreeMap::new();
    for i in graph.order() {
        let parents = graph.parents(i);
        let raw: Vec<(NodeId, f64)> = parents
            .iter()
            .map(|&j| {
                let m = rng.gen_range(0.2..=0.9);
                (j, if rng.gen_bool(0.5) { m } else { -m })
            })
            .collect();
        let total: f64 = raw.iter().map(|(_, x)| x.abs()).sum();
        let scale = if total > 0.95 { 0.95 / total } else { 1.0 };
        for (j, x) in raw {
            eta.insert((i, j), x * scale);
        }
    }
    SymBinaryModel::new(graph.clone(), eta)
}

/// Dense joint table over `nodes` (ascending). Index bit `k` is the level of
/// `nodes[k]`: bit 0 ↔ `+1`, bit 1 ↔ `−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub nodes: Vec<NodeId>,
    pub probs: Vec<f64>,
}

impl JointTable {
    pub fn uniform(nodes: Vec<NodeId>) -> Self {
        let n = 1usize << nodes.len();
        JointTable { nodes, probs: vec![1.0 / n as f64; n] }
    }

    pub fn d(&self) -> usize {
        self.nodes.len()
    }

    pub fn bit(&self, n: NodeId) -> Result<usize> {
        self.nodes.iter().position(|&x| x == n).ok_or(Error::UnknownNode(n))
    }

    /// Levels of one cell, in node order.
    pub fn levels(&self, index: usize) -> Vec<i8> {
        (0..self.d()).map(|k| if index >> k & 1 == 0 { 1 } else { -1 }).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `π(x) = π(−x)` for every cell.
    pub fn is_jointly_symmetric(&self, tol: f64) -> bool {
        let flip = self.probs.len() - 1;
        self.probs.iter().enumerate().all(|(k, &p)| (p - self.probs[k ^ flip]).abs() <= tol)
    }

    /// `E(Π_{k ∈ s} X_k)`.
    pub fn moment(&self, s: &NodeSet) -> Result<f64> {
        let mask = s.iter().map(|&n| self.bit(n).map(|b| 1usize << b)).sum::<Result<usize>>()?;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .map(|(k, &p)| if (k & mask).count_ones() % 2 == 0 { p } else { -p })
            .sum())
    }

    /// Sums out every node outside `keep`.
    pub fn marginal(&self, keep: &NodeSet) -> Result<JointTable> {
        let bits: Vec<usize> = keep.iter().map(|&n| self.bit(n)).collect::<Result<_>>()?;
        let mut probs = vec![0.0; 1 << bits.len()];
        for (k, &p) in self.probs.iter().enumerate() {
            let idx = bits.iter().enumerate().fold(0, |acc, (t, &b)| acc | (k >> b & 1) << t);
            probs[idx] += p;
        }
        Ok(JointTable { nodes: keep.iter().copied().collect(), probs })
    }

    /// Correlation matrix of the table, which is also its covariance matrix.
    pub fn sigma(&self) -> RealMatrix {
        let d = self.d();
        let mut m = DMatrix::identity(d, d);
        for r in 0..d {
            for c in r + 1..d {
                let x = self.moment(&[self.nodes[r], self.nodes[c]].into_iter().collect()).expect("own nodes");
                m[(r, c)] = x;
                m[(c, r)] = x;
            }
        }
        RealMatrix { order: self.nodes.clone(), values: m }
    }
}

/// Product of the main-effect conditionals in the graph's declared order.
pub fn build_table(model: &SymBinaryModel) -> Result<JointTable> {
    let nodes: Vec<NodeId> = model.graph.nodes().into_iter().collect();
    let pos = |n: NodeId| nodes.iter().position(|&x| x == n).expect("graph node");
    let terms: Vec<(usize, Vec<(usize, f64)>)> = model
        .graph
        .order()
        .into_iter()
        .map(|i| {
            let parents = model.graph.parents(i).into_iter().map(|j| (pos(j), model.eta(i, j))).collect();
            (pos(i), parents)
        })
        .collect();
    let d = nodes.len();
    let mut probs = vec![0.0; 1 << d];
    for (k, cell) in probs.iter_mut().enumerate() {
        let x = |b: usize| if k >> b & 1 == 0 { 1.0 } else { -1.0 };
        let mut p = 1.0;
        for (i, parents) in &terms {
            let s: f64 = parents.iter().map(|&(j, e)| e * x(*i) * x(j)).sum();
            let c = 0.5 * (1.0 + s);
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&c) {
                return Err(Error::InvalidProbability {
                    node: nodes[*i],
                    value: c,
                    assignment: (0..d).map(|b| x(b) as i8).collect(),
                });
            }
            p *= c.clamp(0.0, 1.0);
        }
        *cell = p;
    }
    Ok(JointTable { nodes, probs })
}

/// `E(X_i X_j)`.
pub fn correlation(table: &JointTable, i: NodeId, j: NodeId) -> Result<f64> {
    if i == j {
        table.bit(i)?;
        return Ok(1.0);
    }
    table.moment(&[i, j].into_iter().collect())
}

/// Regresses each node on its whole past in the graph's order and checks
/// that the coefficients vanish at missing arrows.
pub fn eta_from_sigma(sigma: &RealMatrix, graph: &RegressionGraph) -> Result<SymBinaryModel> {
    if !graph.is_parent_graph() {
        return Err(Error::NotRealizable("binary models are generated over parent graphs".into()));
    }
    let mut labels = sigma.order.clone();
    labels.sort();
    if labels != graph.nodes().into_iter().collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch("Σ and the graph have different nodes".into()));
    }
    for &n in &sigma.order {
        if (sigma.at(n, n)? - 1.0).abs() > PROB_TOL {
            return Err(Error::NotRealizable(format!("σ_{n}{n} ≠ 1")));
        }
    }
    let mut eta = BTreeMap::new();
    for i in graph.order() {
        let past: Vec<NodeId> = graph.past(i)?.into_iter().collect();
        if past.is_empty() {
            continue;
        }
        let spp = sigma.block(&past, &past)?;
        let sip = sigma.block(&[i], &past)?;
        let lu = spp.lu();
        let coef = lu
            .solve(&sip.transpose())
            .filter(|_| lu.determinant().abs() > 1e-14)
            .ok_or_else(|| Error::SingularBlock(format!("Σ over the past of {i}")))?;
        let parents = graph.parents(i);
        for (k, &j) in past.iter().enumerate() {
            let x = coef[k];
            if parents.contains(&j) {
                eta.insert((i, j), x);
            } else if x.abs() > PROB_TOL {
                return Err(Error::NotRealizable(format!("η_{i}{j} = {x:.3e} at a missing arrow")));
            }
        }
    }
    let model = SymBinaryModel::new(graph.clone(), eta)?;
    build_table(&model).map_err(|e| Error::NotRealizable(e.to_string()))?;
    Ok(model)
}

/// `α ⫫ β | c` in the table, with the remaining nodes summed out.
pub fn independence_in_table(table: &JointTable, q: &IndepQuery) -> Result<bool> {
    let all: NodeSet = table.nodes.iter().copied().collect();
    q.margin(&all)?;
    let abc: NodeSet = q.alpha.iter().chain(&q.beta).chain(&q.c).copied().collect();
    let t = table.marginal(&abc)?;
    let mask = |s: &NodeSet| s.iter().map(|&n| 1usize << t.bit(n).expect("kept node")).sum::<usize>();
    let (ma, mb, mc) = (mask(&q.alpha), mask(&q.beta), mask(&q.c));

    let sum_over = |keep: usize| {
        let mut out = vec![0.0; 1 << t.d()];
        for (k, &p) in t.probs.iter().enumerate() {
            out[k & keep] += p;
        }
        out
    };
    let (pac, pbc, pc) = (sum_over(ma | mc), sum_over(mb | mc), sum_over(mc));
    for (k, &p) in t.probs.iter().enumerate() {
        let c = pc[k & mc];
        if c <= PROB_TOL {
            continue;
        }
        if (p / c - pac[k & (ma | mc)] / c * pbc[k & (mb | mc)] / c).abs() > PROB_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
