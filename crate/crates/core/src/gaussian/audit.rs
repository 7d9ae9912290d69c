use serde::{Deserialize, Serialize};

use super::{joint_response_params, sample_system, RegressionSystem};
use crate::edge::induced_regression;
use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeSet, RegressionGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InducedPart {
    /// `Σ_aa|b` against `N_aa|b`.
    CovAaGivenB,
    /// `Π_a|b` against `N_a|b`.
    PiAGivenB,
    /// `Σ^bb.a` against `N^bb.a`.
    ConBb,
}

/// One off-diagonal parameter compared with its edge-matrix entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCell {
    pub part: InducedPart,
    pub i: NodeId,
    pub j: NodeId,
    /// The induced edge matrix has a one here.
    pub edge: bool,
    /// Largest `|parameter|` over the systems.
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub a: Vec<NodeId>,
    pub b: Vec<NodeId>,
    pub systems: usize,
    pub tol: f64,
    pub cells: Vec<AuditCell>,
}

impl AuditReport {
    /// Zeros of the edge matrices that some system violates.
    pub fn violations(&self) -> impl Iterator<Item = &AuditCell> {
        self.cells.iter().filter(move |c| !c.edge && c.max_abs >= self.tol)
    }

    /// Ones of the edge matrices where every system has a vanishing parameter.
    pub fn non_structural_zeros(&self) -> impl Iterator<Item = &AuditCell> {
        self.cells.iter().filter(move |c| c.edge && c.max_abs < self.tol)
    }

    pub fn is_consistent(&self) -> bool {
        self.violations().next().is_none() && self.non_structural_zeros().next().is_none()
    }
}

/// Compares the induced edge matrices of `(a, b)` with the parameters of the
/// given systems, all of which must live over `graph`.
pub fn audit_systems(graph: &RegressionGraph, a: &NodeSet, systems: &[RegressionSystem], tol: f64) -> Result<AuditReport> {
    let report = graph.validate();
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report));
    }
    if systems.iter().any(|s| &s.graph != graph) {
        return Err(Error::DimensionMismatch("system over a different graph".into()));
    }
    let induced = induced_regression(&graph.h_matrix(), &graph.w_matrix(), a)?;
    let (av, bv) = (induced.a.clone(), induced.b.clone());

    let mut cells = Vec::new();
    let mut push = |part, rows: &[NodeId], cols: &[NodeId], m: &crate::edge::EdgeMatrix, upper: bool| {
        for (r, &i) in rows.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                if upper && c <= r {
                    continue;
                }
                cells.push(AuditCell { part, i, j, edge: m.get(r, c), max_abs: 0.0 });
            }
        }
    };
    push(InducedPart::CovAaGivenB, &av, &av, &induced.cov_aa_given_b, true);
    push(InducedPart::PiAGivenB, &av, &bv, &induced.arrows_a_given_b, false);
    push(InducedPart::ConBb, &bv, &bv, &induced.con_bb, true);

    let pos = |v: &[NodeId], n: NodeId| v.iter().position(|&x| x == n).expect("label of the split");
    for s in systems {
        let params = joint_response_params(&s.covariance()?, a)?;
        for cell in &mut cells {
            let x = match cell.part {
                InducedPart::CovAaGivenB => params.sigma_aa_given_b[(pos(&av, cell.i), pos(&av, cell.j))],
                InducedPart::PiAGivenB => params.pi_a_given_b[(pos(&av, cell.i), pos(&bv, cell.j))],
                InducedPart::ConBb => params.sigma_bb_concentration[(pos(&bv, cell.i), pos(&bv, cell.j))],
            };
            cell.max_abs = cell.max_abs.max(x.abs());
        }
    }
    Ok(AuditReport { a: av, b: bv, systems: systems.len(), tol, cells })
}

/// [`audit_systems`] on one sampled system per seed.
pub fn structural_zero_audit(graph: &RegressionGraph, a: &NodeSet, seeds: &[u64], tol: f64) -> Result<AuditReport> {
    let systems: Vec<RegressionSystem> = seeds.iter().map(|&s| sample_system(graph, s)).collect::<Result<_>>()?;
    audit_systems(graph, a, &systems, tol)
}
