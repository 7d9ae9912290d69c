use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CovariancePair, RealMatrix, TriangularSystem};
use crate::error::{Error, Result};
use crate::graph::{EdgeKind, NodeId, RegressionGraph};

/// `H X = η` with `cov(η) = W`, in the graph's declared order.
///
/// Response rows of `H` carry the identity on their own block and the
/// negated regression coefficients on later blocks. The context block of `H`
/// is `Σ_vv⁻¹`, and so is the context block of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSystem {
    pub graph: RegressionGraph,
    pub h: RealMatrix,
    pub w: RealMatrix,
}

impl RegressionSystem {
    pub fn new(graph: RegressionGraph, h: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        let report = graph.validate();
        if !report.is_valid() {
            return Err(Error::InvalidGraph(report));
        }
        let order = graph.order();
        Ok(RegressionSystem {
            h: RealMatrix::new(order.clone(), h)?,
            w: RealMatrix::new(order, w)?,
            graph,
        })
    }

    /// A parent graph system: `H = A`, `W = Δ`. The graph's declared order
    /// must match the system's.
    pub fn from_triangular(graph: RegressionGraph, ts: &TriangularSystem) -> Result<Self> {
        if graph.order() != ts.order {
            return Err(Error::DimensionMismatch("graph order differs from the system".into()));
        }
        let mut h = ts.a.clone();
        let mut w = DMatrix::from_diagonal(&ts.delta);
        // a context node of a parent graph stores its concentration
        for (k, &n) in ts.order.iter().enumerate() {
            if graph.is_context(n) {
                h[(k, k)] = 1.0 / ts.delta[k];
                w[(k, k)] = 1.0 / ts.delta[k];
            }
        }
        RegressionSystem::new(graph, h, w)
    }

    fn split(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.h.order.len()).partition(|&k| !self.graph.is_context(self.h.order[k]))
    }

    /// `Σ` from `Σ_vv = (H_vv)⁻¹`, `P = −H_uu⁻¹ H_uv` and
    /// `Σ_uu|v = H_uu⁻¹ W_uu H_uu⁻ᵀ`.
    pub fn covariance(&self) -> Result<CovariancePair> {
        let (u, v) = self.split();
        let pick = |m: &DMatrix<f64>, r: &[usize], c: &[usize]| DMatrix::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])]);
        let h = &self.h.values;
        let huu_inv = pick(h, &u, &u).try_inverse().ok_or(Error::SingularBlock("H_uu".into()))?;
        let svv = if v.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            pick(h, &v, &v).try_inverse().ok_or(Error::SingularBlock("H_vv".into()))?
        };
        let p = -(&huu_inv * pick(h, &u, &v));
        let suu_v = &huu_inv * pick(&self.w.values, &u, &u) * huu_inv.transpose();
        let suv = &p * &svv;
        let suu = suu_v + &suv * p.transpose();

        let d = u.len() + v.len();
        let mut sigma = DMatrix::zeros(d, d);
        for (r, &i) in u.iter().enumerate() {
            for (c, &j) in u.iter().enumerate() {
                sigma[(i, j)] = suu[(r, c)];
            }
            for (c, &j) in v.iter().enumerate() {
                sigma[(i, j)] = suv[(r, c)];
                sigma[(j, i)] = suv[(r, c)];
            }
        }
        for (r, &i) in v.iter().enumerate() {
            for (c, &j) in v.iter().enumerate() {
                sigma[(i, j)] = svv[(r, c)];
            }
        }
        // symmetrize away rounding
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        CovariancePair::from_sigma(RealMatrix { order: self.h.order.clone(), values: sigma })
    }
}

fn draw<R: Rng>(rng: &mut R) -> f64 {
    let m = rng.gen_range(0.2..=0.9);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Random parameters with exact zeros at missing edges.
///
/// Edge parameters have absolute value in `[0.2, 0.9]` and a random sign.
/// Dashed blocks of `W` and the context concentration are made strictly
/// diagonally dominant, hence positive definite.
pub fn sample_system(graph: &RegressionGraph, seed: u64) -> Result<RegressionSystem> {
    let report = graph.validate();
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report));
    }
    let order = graph.order();
    let d = order.len();
    let pos = |n: NodeId| order.iter().position(|&x| x == n).expect("edge endpoint in graph");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = DMatrix::<f64>::identity(d, d);
    let mut w = DMatrix::<f64>::zeros(d, d);
    for e in graph.edges() {
        let (i, j) = (pos(e.i), pos(e.j));
        let x = draw(&mut rng);
        match e.kind {
            EdgeKind::Arrow => h[(i, j)] = x,
            EdgeKind::Dashed => {
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
            EdgeKind::Full => {
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
    }
    for (k, &n) in order.iter().enumerate() {
        if graph.is_context(n) {
            let load: f64 = (0..d).filter(|&j| j != k && graph.is_context(order[j])).map(|j| h[(k, j)].abs()).sum();
            h[(k, k)] = 1.0 + load;
        } else {
            let load: f64 = (0..d).filter(|&j| j != k).map(|j| w[(k, j)].abs()).sum();
            w[(k, k)] = 1.0 + load;
        }
    }
    for (r, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            if graph.is_context(i) && graph.is_context(j) {
                w[(r, c)] = h[(r, c)];
            }
        }
    }
    RegressionSystem::new(graph.clone(), h, w)
}
