//! Seeded inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traceable::graph::random_regression_graph;
use traceable::{NodeSet, RegressionGraph};

/// A random regression graph on `d` nodes and a random half of its nodes.
pub fn graph_and_margin(d: u32, seed: u64) -> (RegressionGraph, NodeSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_regression_graph(&mut rng, d, 0.3);
    let a = g.order().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    (g, a)
}

/// A random parent graph on `d` nodes, labelled in the order of the arrows.
pub fn parent_graph(d: u32, seed: u64) -> RegressionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<u32> = (1..=d).collect();
    let mut arrows = Vec::new();
    for i in 1..=d {
        for j in i + 1..=d {
            if rng.gen_bool(0.3) {
                arrows.push((i, j));
            }
        }
    }
    RegressionGraph::parent_graph(&nodes, &arrows).expect("arrows point from later to earlier nodes")
}
