//! Checks shared by the acceptance harness and the integration tests. Each
//! returns a short summary on success and the first failure otherwise.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use traceable::binary::{build_table, eta_from_sigma, independence_in_table, sample_model, SymBinaryModel};
use traceable::edge::{induced_connections, induced_overall, induced_regression, partial_closure, EdgeMatrix};
use traceable::gaussian::{
    audit_systems, covariance_from_triangular, induced_correlations_3node, partial_correlation, partial_inversion,
    structural_zero_audit, InducedPart, RealMatrix, RegressionSystem, ThreeNodeConstraint, TriangularSystem,
};
use traceable::graph::random_regression_graph;
use traceable::independence::{
    markov_equivalent, no_connection, separated, separated_by_matrix, singleton_transitivity_check, Separator,
};
use traceable::oracle::{all_regression_graphs, closure_by_paths, separated_by_paths, AnteriorGraphWalk, PathOracle};
use traceable::EdgeKind;
use traceable::{node_set, BlockStructure, Edge, IndepQuery, NodeId, NodeSet, RegressionGraph};

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn set_of(order: &[NodeId], mask: u32) -> NodeSet {
    order.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &n)| n).collect()
}

/// Nonempty submasks of `mask`.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut s = mask;
    let mut done = mask == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = s;
        s = (s - 1) & mask;
        done = s == 0;
        Some(out)
    })
}

fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&x| NodeId(x)).collect()
}

fn unit_triangular(d: usize, upper: &[(usize, usize, f64)], delta: &[f64]) -> TriangularSystem {
    let mut a = DMatrix::identity(d, d);
    for &(i, j, x) in upper {
        a[(i - 1, j - 1)] = x;
    }
    TriangularSystem::new(ids(&(1..=d as u32).collect::<Vec<_>>()), a, DVector::from_column_slice(delta)).unwrap()
}

fn parent_model(order: &[u32], eta: &[((u32, u32), f64)]) -> SymBinaryModel {
    let arrows: Vec<(u32, u32)> = eta.iter().map(|&(e, _)| e).collect();
    let g = RegressionGraph::parent_graph(order, &arrows).unwrap();
    let eta = eta.iter().map(|&((i, j), x)| ((NodeId(i), NodeId(j)), x)).collect();
    SymBinaryModel::new(g, eta).unwrap()
}

fn rho_grid() -> Vec<(f64, f64, f64)> {
    let vals = [-0.8, -0.45, -0.1, 0.2, 0.55, 0.9];
    let mut out = Vec::new();
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// Off-diagonal ones of a square edge matrix as label pairs `(i, j)`, `i < j`.
fn pairs_of(m: &EdgeMatrix) -> BTreeSet<(u32, u32)> {
    let order = m.order();
    let mut out = BTreeSet::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c && m.get(r, c) {
                let (x, y) = (order[r].0, order[c].0);
                out.insert((x.min(y), x.max(y)));
            }
        }
    }
    out
}

// ---- induced correlations -------------------------------------------------

pub fn induced_correlation_numbers() -> Check {
    let r = induced_correlations_3node(0.7, 0.7, 0.0, ThreeNodeConstraint::Marginal23).map_err(|e| e.to_string())?;
    ensure!((r - (-0.49 / 0.51)).abs() < 1e-12, "ρ_23|1 = {r}");
    ensure!(-r > 0.96, "−ρ_23|1 = {} is not above 0.96", -r);
    let sigma = RealMatrix::natural(DMatrix::from_row_slice(3, 3, &[1.0, 0.7, 0.7, 0.7, 1.0, 0.0, 0.7, 0.0, 1.0]));
    let direct = partial_correlation(&sigma, NodeId(2), NodeId(3), &node_set([1])).map_err(|e| e.to_string())?;
    ensure!((direct - r).abs() < 1e-12, "partial correlation from Σ is {direct}, formula gives {r}");

    let s = induced_correlations_3node(0.7, 0.0, 0.7, ThreeNodeConstraint::Conditional13Given2).map_err(|e| e.to_string())?;
    ensure!(s == 0.7 * 0.7 && (s - 0.49).abs() < 1e-15, "ρ_13 = {s}");
    // 1 ⫫ 3 | 2 with unit variances: σ_13 = σ_12 σ_23
    let ts = unit_triangular(3, &[(1, 2, -0.7), (2, 3, -0.7)], &[0.51, 0.51, 1.0]);
    let cp = covariance_from_triangular(&ts).map_err(|e| e.to_string())?;
    let s13 = cp.sigma.at(NodeId(1), NodeId(3)).unwrap();
    ensure!((s13 - s).abs() < 1e-12, "σ_13 from the chain is {s13}");
    Ok(format!("ρ_23|1 = {r:.6}, ρ_13 = {s}"))
}

// ---- overall induced graphs ------------------------------------------------

pub fn five_node_parent_graph() -> RegressionGraph {
    RegressionGraph::parent_graph(&[1, 2, 3, 4, 5], &[(1, 2), (1, 3), (3, 5), (4, 5)]).unwrap()
}

pub fn five_node_overall_graphs() -> Check {
    let g = five_node_parent_graph();
    let (cov, con) = induced_overall(&g.h_matrix()).map_err(|e| e.to_string())?;
    let skeleton: BTreeSet<(u32, u32)> = g.skeleton().into_iter().map(|(x, y)| (x.0.min(y.0), x.0.max(y.0))).collect();
    let added_con: Vec<_> = pairs_of(&con).difference(&skeleton).copied().collect();
    let added_cov: Vec<_> = pairs_of(&cov).difference(&skeleton).copied().collect();
    ensure!(pairs_of(&con).is_superset(&skeleton) && pairs_of(&cov).is_superset(&skeleton), "an edge was lost");
    ensure!(added_con == vec![(2, 3)], "concentration graph adds {added_con:?}");
    ensure!(added_cov == vec![(1, 4), (1, 5), (3, 4)], "covariance graph adds {added_cov:?}");
    Ok(format!("concentration adds {added_con:?}, covariance adds {added_cov:?}"))
}

// ---- worked examples ---------------------------------------------------------

pub fn star_graph_example() -> Check {
    let mut cases = 0;
    for (r1, r2, r3) in rho_grid() {
        let ts = unit_triangular(4, &[(1, 4, -r1), (2, 4, -r2), (3, 4, -r3)], &[1.0 - r1 * r1, 1.0 - r2 * r2, 1.0 - r3 * r3, 1.0]);
        let cp = covariance_from_triangular(&ts).map_err(|e| e.to_string())?;
        let at = |i, j| cp.sigma.at(NodeId(i), NodeId(j)).unwrap();
        ensure!((at(1, 2) - r1 * r2).abs() < 1e-12, "σ_12 at {r1}, {r2}");
        ensure!((at(1, 3) - r1 * r3).abs() < 1e-12, "σ_13 at {r1}, {r3}");
        ensure!((at(2, 3) - r2 * r3).abs() < 1e-12, "σ_23 at {r2}, {r3}");
        cases += 1;
    }
    let star = RegressionGraph::parent_graph(&[1, 2, 3, 4], &[(1, 4), (2, 4), (3, 4)]).unwrap();
    let (_, con) = induced_overall(&star.h_matrix()).map_err(|e| e.to_string())?;
    ensure!(pairs_of(&con) == BTreeSet::from([(1, 4), (2, 4), (3, 4)]), "concentration graph {:?}", pairs_of(&con));
    let undirected = RegressionGraph::concentration(4, &[(1, 4), (2, 4), (3, 4)]).unwrap();
    ensure!(markov_equivalent(&star, &undirected), "star graph not equivalent to its concentration graph");
    Ok(format!("{cases} ρ triples, no added edge, equivalent"))
}

pub fn markov_chain_example() -> Check {
    let mut cases = 0;
    for (r12, r23, r34) in rho_grid() {
        let ts = unit_triangular(
            4,
            &[(1, 2, -r12), (2, 3, -r23), (3, 4, -r34)],
            &[1.0 - r12 * r12, 1.0 - r23 * r23, 1.0 - r34 * r34, 1.0],
        );
        let cp = covariance_from_triangular(&ts).map_err(|e| e.to_string())?;
        let at = |i, j| cp.sigma.at(NodeId(i), NodeId(j)).unwrap();
        for (i, j, x) in [(1, 2, r12), (2, 3, r23), (3, 4, r34), (1, 3, r12 * r23), (2, 4, r23 * r34), (1, 4, r12 * r23 * r34)] {
            ensure!((at(i, j) - x).abs() < 1e-12, "σ_{i}{j} = {} expected {x}", at(i, j));
        }
        if r12.abs() + r23.abs() + r34.abs() < 3.0 {
            let m = parent_model(&[1, 2, 3, 4], &[((1, 2), r12), ((2, 3), r23), ((3, 4), r34)]);
            let t = build_table(&m).map_err(|e| e.to_string())?;
            for (k, &p) in t.probs.iter().enumerate() {
                let x: Vec<f64> = t.levels(k).into_iter().map(f64::from).collect();
                let expect = (1.0 + r12 * x[0] * x[1]) * (1.0 + r23 * x[1] * x[2]) * (1.0 + r34 * x[2] * x[3]) / 16.0;
                ensure!((p - expect).abs() < 1e-12, "cell {k} at ({r12}, {r23}, {r34})");
            }
        }
        cases += 1;
    }
    let chain = RegressionGraph::parent_graph(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 4)]).unwrap();
    let undirected = RegressionGraph::concentration(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
    ensure!(markov_equivalent(&chain, &undirected), "chains not equivalent");
    Ok(format!("{cases} ρ triples, tables match, equivalent"))
}

fn covariance_chain_sigma(r12: f64, r23: f64, r34: f64) -> RealMatrix {
    RealMatrix::natural(DMatrix::from_row_slice(
        4,
        4,
        &[1.0, r12, 0.0, 0.0, r12, 1.0, r23, 0.0, 0.0, r23, 1.0, r34, 0.0, 0.0, r34, 1.0],
    ))
}

// Node 2 on 1, 3, 4 and node 3 on 4, in the order (2, 3, 1, 4).
fn sur_model(r12: f64, r23: f64, r34: f64) -> SymBinaryModel {
    let s = 1.0 - r34 * r34;
    parent_model(&[2, 3, 1, 4], &[((2, 1), r12), ((2, 3), r23 / s), ((2, 4), -r23 * r34 / s), ((3, 4), r34)])
}

pub fn sur_graph() -> RegressionGraph {
    RegressionGraph::new(
        BlockStructure::new(vec![node_set([2, 3])], node_set([1, 4])),
        [Edge::arrow(2, 1), Edge::dashed(2, 3), Edge::arrow(3, 4)],
    )
    .unwrap()
}

pub fn covariance_chain_example() -> Check {
    let complete: Vec<(u32, u32)> = (1..=4).flat_map(|i| (i + 1..=4).map(move |j| (i, j))).collect();
    let dag = RegressionGraph::parent_graph(&[1, 2, 3, 4], &complete).unwrap();
    let mut checked = 0;
    for (r12, r23, r34) in [(0.25, 0.45, 0.3), (0.3, 0.4, 0.2), (-0.35, 0.25, -0.5), (0.1, -0.4, 0.45)] {
        let m = eta_from_sigma(&covariance_chain_sigma(r12, r23, r34), &dag).map_err(|e| e.to_string())?;
        let e = |i, j| m.eta(NodeId(i), NodeId(j));
        // A = I − η written through the adjacent coefficients
        let a = |i: u32, j: u32| -e(i, j);
        let (e12, e23, e34) = (e(1, 2), e(2, 3), e(3, 4));
        ensure!((a(1, 3) - e12 * e23).abs() < 1e-12, "a_13");
        ensure!((a(1, 4) + e12 * e23 * e34).abs() < 1e-12, "a_14");
        ensure!((a(2, 4) - e23 * e34).abs() < 1e-12, "a_24");
        ensure!((e(2, 4) + e(2, 3) * e(3, 4)).abs() < 1e-12, "η_24 ≠ −η_23 η_34");

        let t = build_table(&sur_model(r12, r23, r34)).map_err(|e| e.to_string())?;
        for (k, &p) in t.probs.iter().enumerate() {
            let x: Vec<f64> = t.levels(k).into_iter().map(f64::from).collect();
            let (i, j, kk, l) = (x[0], x[1], x[2], x[3]);
            let expect = (1.0 + r12 * i * j + r23 * j * kk + r34 * kk * l + r12 * r34 * i * j * kk * l) / 16.0;
            ensure!((p - expect).abs() < 1e-12, "cell {k} at ({r12}, {r23}, {r34})");
        }
        ensure!(t.sigma().max_abs_diff(&covariance_chain_sigma(r12, r23, r34)) < 1e-12, "table correlations");
        checked += 1;
    }
    let chain = RegressionGraph::covariance(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
    let con = induced_regression(&chain.h_matrix(), &chain.w_matrix(), &NodeSet::new()).map_err(|e| e.to_string())?.con_bb;
    ensure!(pairs_of(&con).len() == 6, "induced concentration graph {:?}", pairs_of(&con));
    ensure!(markov_equivalent(&chain, &sur_graph()), "covariance chain not equivalent to the mixed graph");
    Ok(format!("{checked} parameter points, complete concentration graph, equivalent"))
}

// ---- operator laws ----------------------------------------------------------

fn random_edge_matrix(rng: &mut ChaCha8Rng, d: usize) -> EdgeMatrix {
    let density = rng.gen_range(0.1..0.6);
    let mut m = EdgeMatrix::identity(ids(&(1..=d as u32).collect::<Vec<_>>()));
    for r in 0..d {
        for c in 0..d {
            if r != c && rng.gen_bool(density) {
                m.set(r, c, true);
            }
        }
    }
    m
}

// Strictly diagonally dominant by rows, so every pivot sequence is regular.
fn random_real_matrix(rng: &mut ChaCha8Rng, d: usize) -> RealMatrix {
    let mut m = DMatrix::from_fn(d, d, |_, _| if rng.gen_bool(0.6) { rng.gen_range(-1.0..1.0) } else { 0.0 });
    for r in 0..d {
        let off: f64 = (0..d).filter(|&c| c != r).map(|c| f64::abs(m[(r, c)])).sum();
        m[(r, r)] = (off + rng.gen_range(0.5..1.5)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    RealMatrix::natural(m)
}

fn random_subset(rng: &mut ChaCha8Rng, order: &[NodeId]) -> NodeSet {
    order.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

pub fn closure_laws(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let d = rng.gen_range(1..=8);
    let m = random_edge_matrix(&mut rng, d);
    let order = m.order().to_vec();
    let (a, b) = (random_subset(&mut rng, &order), random_subset(&mut rng, &order));
    let z = |x: &EdgeMatrix, s: &NodeSet| partial_closure(x, s).map_err(|e| e.to_string());
    let za = z(&m, &a)?;
    ensure!(z(&za, &a)? == za, "seed {seed}: not idempotent");
    ensure!(z(&za, &b)? == z(&z(&m, &b)?, &a)?, "seed {seed}: not commutative");
    let by_paths = closure_by_paths(&m, &a).map_err(|e| e.to_string())?;
    ensure!(by_paths == za, "seed {seed}: differs from the path closure");
    let mut keep = random_subset(&mut rng, &order);
    keep.extend(a.iter().copied());
    let lhs = za.restrict(&keep).map_err(|e| e.to_string())?;
    let rhs = z(&m.restrict(&keep).map_err(|e| e.to_string())?, &a)?;
    ensure!(lhs == rhs, "seed {seed}: not exchangeable with selecting {keep:?}");
    Ok(())
}

pub fn inversion_laws(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed ^ 0x9e37_79b9);
    let d = rng.gen_range(1..=8);
    let m = random_real_matrix(&mut rng, d);
    let (a, b) = (random_subset(&mut rng, &m.order), random_subset(&mut rng, &m.order));
    let inv = |x: &RealMatrix, s: &NodeSet| partial_inversion(x, s).map_err(|e| e.to_string());
    let ia = inv(&m, &a)?;
    ensure!(inv(&ia, &a)?.max_abs_diff(&m) < 1e-10, "seed {seed}: not self-inverse");
    ensure!(inv(&ia, &b)?.max_abs_diff(&inv(&inv(&m, &b)?, &a)?) < 1e-10, "seed {seed}: not commutative");
    let mut keep = random_subset(&mut rng, &m.order);
    keep.extend(a.iter().copied());
    let lhs = ia.restrict(&keep).map_err(|e| e.to_string())?;
    let rhs = inv(&m.restrict(&keep).map_err(|e| e.to_string())?, &a)?;
    ensure!(lhs.max_abs_diff(&rhs) < 1e-10, "seed {seed}: not exchangeable with selecting {keep:?}");
    let all: NodeSet = m.order.iter().copied().collect();
    let direct = m.values.clone().try_inverse().ok_or("singular test matrix")?;
    ensure!((inv(&m, &all)?.values - direct).amax() < 1e-10, "seed {seed}: inv_N M ≠ M⁻¹");
    Ok(())
}

pub fn operator_laws(seeds: std::ops::Range<u64>) -> Check {
    let n = seeds.end - seeds.start;
    for seed in seeds {
        closure_laws(seed)?;
        inversion_laws(seed)?;
    }
    Ok(format!("{n} seeds for each operator"))
}

// ---- separation criteria ------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct Sweep {
    pub graphs: u64,
    pub queries: u64,
    pub transitivity_cases: u64,
    /// Queries where the literal anterior-graph walk disagrees, all on graphs with dashed lines.
    pub anterior_walk_misses: u64,
    pub graphs_with_misses: u64,
}

/// Every valid regression graph on up to `d_max` nodes (up to relabeling) and
/// every query on it. The edge-matrix criterion is read from one connection
/// matrix per split; the path criterion walks the graph itself. The literal
/// anterior-graph walk is run alongside and may only err towards
/// independence on graphs with dashed lines. The public entry points are called on every query of the two
/// undirected families, where they take their own route, and on the first
/// query of every split otherwise. Pairwise answers feed the singleton
/// transitivity check.
pub fn exhaustive_sweep(d_max: u32) -> Result<Sweep, String> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sweep = Sweep::default();
    for d in 1..=d_max {
        let graphs: Vec<RegressionGraph> = all_regression_graphs(d).collect();
        let chunk = graphs.len().div_ceil(threads);
        let parts: Vec<Result<Sweep, String>> = std::thread::scope(|scope| {
            let handles: Vec<_> = graphs.chunks(chunk).map(|part| scope.spawn(move || sweep_graphs(d, part))).collect();
            handles.into_iter().map(|h| h.join().expect("sweep thread")).collect()
        });
        for part in parts {
            let part = part?;
            sweep.graphs += part.graphs;
            sweep.queries += part.queries;
            sweep.transitivity_cases += part.transitivity_cases;
            sweep.anterior_walk_misses += part.anterior_walk_misses;
            sweep.graphs_with_misses += part.graphs_with_misses;
        }
    }
    Ok(sweep)
}

fn sweep_graphs(d: u32, graphs: &[RegressionGraph]) -> Result<Sweep, String> {
    let mut sweep = Sweep::default();
    let full = (1u32 << d) - 1;
    for g in graphs {
        ensure!(g.validate().is_valid(), "enumerated an invalid graph: {g:?}");
        sweep.graphs += 1;
        let order = g.order();
        let (h, w) = (g.h_matrix(), g.w_matrix());
        let undirected = g.is_concentration_graph() || g.is_covariance_graph();
        let mut sep = Separator::new(g).map_err(|e| e.to_string())?;
        let oracle = PathOracle::new(g);
        let dashed = g.edges().iter().any(|e| e.kind == EdgeKind::Dashed);
        let misses_before = sweep.anterior_walk_misses;
        // (i, j, mask of c) for single-node queries
        let mut pairwise = vec![false; ((d * d) as usize) << d];
        for amask in 0..=full {
            let a = set_of(&order, amask);
            let conn = induced_connections(&h, &w, &a).map_err(|e| e.to_string())?;
            let walk = AnteriorGraphWalk::new(g, &a).map_err(|e| e.to_string())?;
            let mut first = true;
            for alpha in submasks(amask) {
                for beta in submasks(full ^ amask) {
                    let c = full ^ amask ^ beta;
                    // disjoint and nonempty by construction
                    let q = IndepQuery { alpha: set_of(&order, alpha), beta: set_of(&order, beta), c: set_of(&order, c) };
                    let by_matrix = no_connection(&conn, &q.alpha, &q.beta);
                    let by_paths = oracle.active_path(&q).map_err(|e| e.to_string())?.is_none();
                    ensure!(by_matrix == by_paths, "{g:?}: {q}: matrix says {by_matrix}, paths say {by_paths}");
                    let by_walk = walk.active_path(&q).map_err(|e| e.to_string())?.is_none();
                    if by_walk != by_paths {
                        ensure!(dashed && by_walk, "{g:?}: {q}: anterior-graph walk says {by_walk}");
                        sweep.anterior_walk_misses += 1;
                    }
                    if undirected || first {
                        let s = sep.separated(&q).map_err(|e| e.to_string())?;
                        ensure!(s == by_matrix, "{g:?}: {q}: separated says {s}");
                    }
                    if first && amask == 1 {
                        let m = separated_by_matrix(g, &q).map_err(|e| e.to_string())?;
                        ensure!(m == by_matrix, "{g:?}: {q}: uncached matrix criterion says {m}");
                    }
                    first = false;
                    if alpha.count_ones() == 1 && beta.count_ones() == 1 {
                        let (i, j) = (alpha.trailing_zeros() as usize, beta.trailing_zeros() as usize);
                        pairwise[pair_index(d as usize, i, j, c)] = by_matrix;
                    }
                    sweep.queries += 1;
                }
            }
        }
        sweep.graphs_with_misses += u64::from(sweep.anterior_walk_misses > misses_before);
        sweep.transitivity_cases += transitivity_from_table(g, &order, &pairwise, sweep.graphs)?;
    }
    Ok(sweep)
}

fn pair_index(d: usize, i: usize, j: usize, c: u32) -> usize {
    ((i * d + j) << d) | c as usize
}

// All (i, j, h, c) with i < j; every 499th graph is also run through the
// public check.
fn transitivity_from_table(g: &RegressionGraph, order: &[NodeId], pairwise: &[bool], index: u64) -> Result<u64, String> {
    let d = order.len();
    let full = (1u32 << d) - 1;
    let sep = |x: usize, y: usize, c: u32| pairwise[pair_index(d, x, y, c)];
    let mut cases = 0;
    for i in 0..d {
        for j in i + 1..d {
            for h in (0..d).filter(|&h| h != i && h != j) {
                let rest = full & !(1 << i) & !(1 << j) & !(1 << h);
                for c in submasks(rest).chain([0]) {
                    let holds = !(sep(i, j, c) && sep(i, j, c | 1 << h)) || sep(i, h, c) || sep(j, h, c);
                    ensure!(holds, "{g:?}: transitivity fails for i={}, j={}, h={}, c={:?}", order[i], order[j], order[h], set_of(order, c));
                    if index.is_multiple_of(499) {
                        let public = singleton_transitivity_check(g, order[i], order[j], order[h], &set_of(order, c))
                            .map_err(|e| e.to_string())?;
                        ensure!(public, "{g:?}: public transitivity check disagrees");
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

/// Random graphs with shuffled labels and random queries on them, through all
/// three public criteria.
pub fn sampled_equivalence(graphs: u64, d_max: u32, queries: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut total = 0;
    for _ in 0..graphs {
        let d = rng.gen_range(2..=d_max);
        let density = rng.gen_range(0.15..0.55);
        let g = random_regression_graph(&mut rng, d, density);
        ensure!(g.validate().is_valid(), "random graph is invalid: {g:?}");
        let order = g.order();
        for _ in 0..queries {
            // 0 → α, 1 → β, 2 → c, 3 → m
            let mut roles: Vec<u8> = order.iter().map(|_| rng.gen_range(0..4)).collect();
            let (x, y) = (rng.gen_range(0..order.len()), rng.gen_range(0..order.len() - 1));
            let y = if y >= x { y + 1 } else { y };
            roles[x] = 0;
            roles[y] = 1;
            let pick = |r: u8| -> NodeSet { order.iter().zip(&roles).filter(|(_, &k)| k == r).map(|(&n, _)| n).collect() };
            let q = IndepQuery::new(pick(0), pick(1), pick(2)).map_err(|e| e.to_string())?;
            let s = separated(&g, &q).map_err(|e| e.to_string())?;
            let m = separated_by_matrix(&g, &q).map_err(|e| e.to_string())?;
            let p = separated_by_paths(&g, &q).map_err(|e| e.to_string())?;
            ensure!(s == m && m == p, "{g:?}: {q}: separated {s}, matrix {m}, paths {p}");
            total += 1;
        }
    }
    Ok(format!("{graphs} random graphs, {total} queries"))
}

// ---- Gaussian audit ------------------------------------------------------------

pub fn audit_random_graphs(graphs: u64, d_max: u32, splits: usize, seed: u64) -> Check {
    let mut rng = rng(seed);
    let mut cells = 0;
    for k in 0..graphs {
        let d = rng.gen_range(2..=d_max);
        let density = rng.gen_range(0.2..0.6);
        let g = random_regression_graph(&mut rng, d, density);
        let order = g.order();
        for _ in 0..splits {
            let a = random_subset(&mut rng, &order);
            let seeds: Vec<u64> = (0..5).map(|s| 100 * k + s).collect();
            let r = structural_zero_audit(&g, &a, &seeds, 1e-9).map_err(|e| e.to_string())?;
            if let Some(c) = r.violations().chain(r.non_structural_zeros()).next() {
                return Err(format!("{g:?}, a = {a:?}: {c:?}"));
            }
            cells += r.cells.len();
        }
    }
    Ok(format!("{graphs} graphs × {splits} splits, {cells} cells"))
}

/// A complete three-node system with `a_13 = a_12 a_23`, which makes σ_13 vanish.
pub fn cancellation_flagged() -> Check {
    let g = RegressionGraph::parent_graph(&[1, 2, 3], &[(1, 2), (1, 3), (2, 3)]).unwrap();
    let (a12, a23) = (0.6, -0.5);
    let ts = unit_triangular(3, &[(1, 2, a12), (2, 3, a23), (1, 3, a12 * a23)], &[1.0, 1.0, 1.0]);
    let sys = RegressionSystem::from_triangular(g.clone(), &ts).map_err(|e| e.to_string())?;
    let report = audit_systems(&g, &node_set([1, 2, 3]), &[sys], 1e-9).map_err(|e| e.to_string())?;
    let flagged: Vec<_> = report.non_structural_zeros().map(|c| (c.part, c.i, c.j)).collect();
    ensure!(report.violations().count() == 0, "violations reported");
    ensure!(flagged == vec![(InducedPart::CovAaGivenB, NodeId(1), NodeId(3))], "flagged {flagged:?}");
    Ok("σ_13 flagged as a non-structural zero".into())
}

// ---- binary oracle ---------------------------------------------------------------

/// Every parent graph on up to `d_max` nodes in natural order, a sampled model
/// on each, and every query the graph answers with independence.
pub fn binary_oracle_agreement(d_max: u32) -> Check {
    let (mut graphs, mut implied) = (0u64, 0u64);
    for d in 1..=d_max {
        let mut seen = BTreeSet::new();
        for g in all_regression_graphs(d).filter(|g| g.is_parent_graph()) {
            if !seen.insert(g.skeleton()) {
                continue;
            }
            let model = sample_model(&g, graphs).map_err(|e| e.to_string())?;
            ensure!(model.eta.values().all(|&x| x != 0.0), "zero coefficient sampled");
            let t = build_table(&model).map_err(|e| e.to_string())?;
            ensure!((t.total() - 1.0).abs() < 1e-12, "{g:?}: total {}", t.total());
            ensure!(t.is_jointly_symmetric(1e-15), "{g:?}: table is not symmetric");
            let order = g.order();
            for mask in 1u32..1 << d {
                if mask.count_ones() % 2 == 1 {
                    let mo = t.moment(&set_of(&order, mask)).map_err(|e| e.to_string())?;
                    ensure!(mo.abs() < 1e-12, "{g:?}: odd moment {mo}");
                }
            }
            let mut sep = Separator::new(&g).map_err(|e| e.to_string())?;
            let full = (1u32 << d) - 1;
            for amask in 0..=full {
                for alpha in submasks(amask) {
                    for beta in submasks(full ^ amask) {
                        let c = full ^ amask ^ beta;
                        let q = IndepQuery::new(set_of(&order, alpha), set_of(&order, beta), set_of(&order, c))
                            .map_err(|e| e.to_string())?;
                        if sep.separated(&q).map_err(|e| e.to_string())? {
                            implied += 1;
                            ensure!(independence_in_table(&t, &q).map_err(|e| e.to_string())?, "{g:?}: {q} fails in the table");
                        }
                    }
                }
            }
            graphs += 1;
        }
    }
    Ok(format!("{graphs} parent graphs, {implied} implied independences hold"))
}
