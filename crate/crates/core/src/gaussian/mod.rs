//! Gaussian parameter matrices and partial inversion.

mod audit;
mod system;

pub use audit::{audit_systems, structural_zero_audit, AuditCell, AuditReport, InducedPart};
pub use system::{sample_system, RegressionSystem};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeSet};

/// Pivots smaller than this in absolute value are treated as zero.
pub const PIVOT_TOL: f64 = 1e-12;

/// A square real matrix whose rows and columns are labelled by nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub order: Vec<NodeId>,
    pub values: DMatrix<f64>,
}

impl RealMatrix {
    pub fn new(order: Vec<NodeId>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != order.len() || values.ncols() != order.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}×{} matrix",
                order.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(RealMatrix { order, values })
    }

    /// Labels `1..=n`.
    pub fn natural(values: DMatrix<f64>) -> Self {
        let order = (1..=values.nrows() as u32).map(NodeId).collect();
        RealMatrix { order, values }
    }

    pub fn position(&self, n: NodeId) -> Result<usize> {
        self.order.iter().position(|&x| x == n).ok_or(Error::UnknownNode(n))
    }

    pub fn at(&self, i: NodeId, j: NodeId) -> Result<f64> {
        Ok(self.values[(self.position(i)?, self.position(j)?)])
    }

    /// Submatrix on the given labels, in the given orders.
    pub fn block(&self, rows: &[NodeId], cols: &[NodeId]) -> Result<DMatrix<f64>> {
        let rp: Vec<usize> = rows.iter().map(|&n| self.position(n)).collect::<Result<_>>()?;
        let cp: Vec<usize> = cols.iter().map(|&n| self.position(n)).collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(rp.len(), cp.len(), |r, c| self.values[(rp[r], cp[c])]))
    }

    /// Principal submatrix on `keep`, in this matrix's order.
    pub fn restrict(&self, keep: &NodeSet) -> Result<RealMatrix> {
        if let Some(&n) = keep.iter().find(|n| !self.order.contains(n)) {
            return Err(Error::UnknownNode(n));
        }
        let order: Vec<NodeId> = self.order.iter().copied().filter(|n| keep.contains(n)).collect();
        let values = self.block(&order, &order)?;
        Ok(RealMatrix { order, values })
    }

    pub fn max_abs_diff(&self, other: &RealMatrix) -> f64 {
        if self.order != other.order {
            return f64::INFINITY;
        }
        (&self.values - &other.values).amax()
    }
}

/// `inv_a M`: one pivot per node of `a`, taken in the matrix's own order.
///
/// A pivot on `k` with `s = m_kk` maps `m_kk ↦ 1/s`, row `k` to `−m_kj/s`,
/// column `k` to `m_ik/s` and every other entry to `m_ij − m_ik m_kj / s`.
pub fn partial_inversion(m: &RealMatrix, a: &NodeSet) -> Result<RealMatrix> {
    if let Some(&n) = a.iter().find(|n| !m.order.contains(n)) {
        return Err(Error::UnknownNode(n));
    }
    let mut out = m.values.clone();
    let n = out.nrows();
    for (k, &node) in m.order.iter().enumerate() {
        if !a.contains(&node) {
            continue;
        }
        let s = out[(k, k)];
        if s.abs() < PIVOT_TOL {
            return Err(Error::SingularPivot { node, pivot: s });
        }
        let col: Vec<f64> = (0..n).map(|i| out[(i, k)]).collect();
        let row: Vec<f64> = (0..n).map(|j| out[(k, j)]).collect();
        for i in (0..n).filter(|&i| i != k) {
            for j in (0..n).filter(|&j| j != k) {
                out[(i, j)] -= col[i] * row[j] / s;
            }
        }
        for j in (0..n).filter(|&j| j != k) {
            out[(k, j)] = -row[j] / s;
            out[(j, k)] = col[j] / s;
        }
        out[(k, k)] = 1.0 / s;
    }
    Ok(RealMatrix { order: m.order.clone(), values: out })
}

/// `A X = ε` with `cov(ε) = Δ`: `A` unit upper-triangular, `Δ` positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularSystem {
    pub order: Vec<NodeId>,
    pub a: DMatrix<f64>,
    pub delta: DVector<f64>,
}

impl TriangularSystem {
    pub fn new(order: Vec<NodeId>, a: DMatrix<f64>, delta: DVector<f64>) -> Result<Self> {
        let d = order.len();
        if a.nrows() != d || a.ncols() != d || delta.len() != d {
            return Err(Error::DimensionMismatch("A, Δ and the order disagree".into()));
        }
        for r in 0..d {
            if a[(r, r)] != 1.0 || (0..r).any(|c| a[(r, c)] != 0.0) {
                return Err(Error::NotTriangular);
            }
        }
        if delta.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(TriangularSystem { order, a, delta })
    }
}

/// `Σ` with its inverse, the concentration matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    pub sigma: RealMatrix,
    pub sigma_inv: RealMatrix,
}

impl CovariancePair {
    /// Checks positive definiteness through a Cholesky factorization.
    pub fn from_sigma(sigma: RealMatrix) -> Result<Self> {
        let chol = nalgebra::Cholesky::new(sigma.values.clone()).ok_or(Error::NotPositiveDefinite)?;
        let inv = chol.inverse();
        Ok(CovariancePair {
            sigma_inv: RealMatrix { order: sigma.order.clone(), values: inv },
            sigma,
        })
    }
}

/// `Σ = A⁻¹ Δ A⁻ᵀ` and `Σ⁻¹ = Aᵀ Δ⁻¹ A`.
pub fn covariance_from_triangular(ts: &TriangularSystem) -> Result<CovariancePair> {
    let a_inv = ts.a.clone().try_inverse().ok_or(Error::SingularMatrix)?;
    let delta = DMatrix::from_diagonal(&ts.delta);
    let delta_inv = DMatrix::from_diagonal(&ts.delta.map(|x| 1.0 / x));
    let sigma = &a_inv * delta * a_inv.transpose();
    let sigma_inv = ts.a.transpose() * delta_inv * &ts.a;
    Ok(CovariancePair {
        sigma: RealMatrix { order: ts.order.clone(), values: sigma },
        sigma_inv: RealMatrix { order: ts.order.clone(), values: sigma_inv },
    })
}

/// Parameters of the joint regression of `X_a` on `X_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointResponseParams {
    pub a: Vec<NodeId>,
    pub b: Vec<NodeId>,
    /// `Π_a|b = Σ_ab Σ_bb⁻¹`, rows `a`, columns `b`.
    pub pi_a_given_b: DMatrix<f64>,
    /// `Σ_aa|b = Σ_aa − Σ_ab Σ_bb⁻¹ Σ_ba`.
    pub sigma_aa_given_b: DMatrix<f64>,
    /// `Σ^bb.a = Σ_bb⁻¹`.
    pub sigma_bb_concentration: DMatrix<f64>,
}

/// Reads the three parameter matrices off `inv_b Σ`.
pub fn joint_response_params(cp: &CovariancePair, a: &NodeSet) -> Result<JointResponseParams> {
    let order = &cp.sigma.order;
    if let Some(&n) = a.iter().find(|n| !order.contains(n)) {
        return Err(Error::UnknownNode(n));
    }
    let av: Vec<NodeId> = order.iter().copied().filter(|n| a.contains(n)).collect();
    let bv: Vec<NodeId> = order.iter().copied().filter(|n| !a.contains(n)).collect();
    let bset: NodeSet = bv.iter().copied().collect();
    let inv = partial_inversion(&cp.sigma, &bset).map_err(|e| match e {
        Error::SingularPivot { .. } => Error::SingularBlock("Σ_bb".into()),
        other => other,
    })?;
    Ok(JointResponseParams {
        pi_a_given_b: inv.block(&av, &bv)?,
        sigma_aa_given_b: inv.block(&av, &av)?,
        sigma_bb_concentration: inv.block(&bv, &bv)?,
        a: av,
        b: bv,
    })
}

/// The independence imposed on three standardized variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThreeNodeConstraint {
    /// `2 ⫫ 3`; the induced value is the partial correlation `ρ_23|1`.
    Marginal23,
    /// `1 ⫫ 3 | 2`; the induced value is the marginal correlation `ρ_13`.
    Conditional13Given2,
}

/// Correlation induced in a three-node graph: under `2 ⫫ 3` the partial
/// correlation `ρ_23|1` (the supplied `rho23` is ignored and taken as 0),
/// under `1 ⫫ 3 | 2` the marginal `ρ_13 = ρ_12 ρ_23` (the supplied `rho13` is
/// ignored).
pub fn induced_correlations_3node(rho12: f64, rho13: f64, rho23: f64, constraint: ThreeNodeConstraint) -> Result<f64> {
    let open = |r: f64| r > -1.0 && r < 1.0;
    match constraint {
        ThreeNodeConstraint::Marginal23 => {
            if !open(rho12) || !open(rho13) || 1.0 - rho12 * rho12 - rho13 * rho13 <= 0.0 {
                return Err(Error::NotPositiveDefinite);
            }
            Ok(-rho12 * rho13 / ((1.0 - rho12 * rho12) * (1.0 - rho13 * rho13)).sqrt())
        }
        ThreeNodeConstraint::Conditional13Given2 => {
            if !open(rho12) || !open(rho23) {
                return Err(Error::NotPositiveDefinite);
            }
            Ok(rho12 * rho23)
        }
    }
}

/// Partial correlation `ρ_ij|c` from `Σ`.
pub fn partial_correlation(sigma: &RealMatrix, i: NodeId, j: NodeId, c: &NodeSet) -> Result<f64> {
    let mut idx = vec![i, j];
    idx.extend(c.iter().copied());
    let sub = sigma.block(&idx, &idx)?;
    let k = sub.try_inverse().ok_or(Error::SingularBlock("conditioning set".into()))?;
    Ok(-k[(0, 1)] / (k[(0, 0)] * k[(1, 1)]).sqrt())
}
