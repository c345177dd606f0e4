//! Synthetic node-classification benchmarks.
//!
//! All generators are pure functions of their arguments: they draw from a
//! ChaCha stream seeded with `seed` and never touch global state.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

/// Node labels used by [`gen_ba_shapes`].
pub mod house {
    pub const BASE: usize = 0;
    pub const TOP: usize = 1;
    pub const MIDDLE: usize = 2;
    pub const BOTTOM: usize = 3;
}

/// Barabási–Albert edges on `n` nodes, `m` edges per new node. Seeds with a
/// star on the first `m + 1` nodes.
fn barabasi_albert(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let mut edges = Vec::new();
    let init = n.min(m + 1);
    let mut repeated: Vec<NodeId> = Vec::new();
    for leaf in 1..init {
        edges.push(Edge::new(0, leaf));
        repeated.push(0);
        repeated.push(leaf);
    }
    for s in init..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = repeated[rng.gen_range(0..repeated.len())];
            targets.insert(t);
        }
        for &t in &targets {
            edges.push(Edge::new(s, t));
            repeated.push(t);
            repeated.push(s);
        }
    }
    edges
}

/// Barabási–Albert base graph with `num_motifs` five-node houses, each hooked
/// to a uniformly chosen base node by one edge from its first bottom node.
/// Labels: 0 base, 1 house top, 2 house middle, 3 house bottom.
pub fn gen_ba_shapes(
    base_nodes: usize,
    attach: usize,
    num_motifs: usize,
    seed: u64,
) -> Result<Graph> {
    if attach < 1 || base_nodes < attach {
        return Err(Error::input(format!(
            "ba-shapes needs base_nodes >= attach >= 1 (got {base_nodes}, {attach})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = barabasi_albert(base_nodes, attach, &mut rng);
    let n = base_nodes + 5 * num_motifs;
    let mut labels = vec![house::BASE; n];
    for h in 0..num_motifs {
        let b = base_nodes + 5 * h;
        let (top, m1, m2, b1, b2) = (b, b + 1, b + 2, b + 3, b + 4);
        for (x, y) in [(top, m1), (top, m2), (m1, m2), (m1, b1), (m2, b2), (b1, b2)] {
            edges.push(Edge::new(x, y));
        }
        labels[top] = house::TOP;
        labels[m1] = house::MIDDLE;
        labels[m2] = house::MIDDLE;
        labels[b1] = house::BOTTOM;
        labels[b2] = house::BOTTOM;
        let anchor = rng.gen_range(0..base_nodes);
        edges.push(Edge::new(b1, anchor));
    }
    Graph::from_edges(n, edges.into_iter().map(|e| (e.u, e.v)))?.with_labels(
        labels,
        vec![false; n],
        Some(4),
    )
}

/// Balanced binary tree of depth `tree_depth` (2^(depth+1) - 1 nodes) with
/// `num_cycles` rings of `cycle_len` nodes, each hooked to a random tree node.
/// Labels: 0 tree, 1 cycle.
pub fn gen_tree_cycles(
    tree_depth: usize,
    num_cycles: usize,
    cycle_len: usize,
    seed: u64,
) -> Result<Graph> {
    if tree_depth < 1 || cycle_len < 3 || tree_depth > 30 {
        return Err(Error::input(format!(
            "tree-cycles needs 1 <= tree_depth <= 30 and cycle_len >= 3 (got {tree_depth}, {cycle_len})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree_nodes = (1usize << (tree_depth + 1)) - 1;
    let mut edges = Vec::new();
    for i in 1..tree_nodes {
        edges.push(Edge::new((i - 1) / 2, i));
    }
    let n = tree_nodes + num_cycles * cycle_len;
    let mut labels = vec![0; n];
    for c in 0..num_cycles {
        let b = tree_nodes + c * cycle_len;
        for k in 0..cycle_len {
            edges.push(Edge::new(b + k, b + (k + 1) % cycle_len));
            labels[b + k] = 1;
        }
        let anchor = rng.gen_range(0..tree_nodes);
        edges.push(Edge::new(b, anchor));
    }
    Graph::from_edges(n, edges.into_iter().map(|e| (e.u, e.v)))?.with_labels(
        labels,
        vec![false; n],
        Some(2),
    )
}

/// Mean peer count of the loan graph. With Poisson-like degrees this puts
/// P(degree > 3) close to one half.
const LOAN_MEAN_DEGREE: f64 = 3.8;

/// The approval rule of the loan benchmark.
pub fn loan_rule(income: f64, degree: usize) -> usize {
    usize::from(income > 5.0 && degree > 3)
}

/// Social graph of loan applicants. Features are `(income, education)` with
/// integer income in 0..=10 and education level in 0..=3; label 1 iff
/// `income > 5` and the applicant has more than 3 peers.
pub fn gen_loan_decision(applicants: usize, seed: u64) -> Result<Graph> {
    if applicants < 2 {
        return Err(Error::input("loan-decision needs at least 2 applicants"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = applicants;
    let mut features = Vec::with_capacity(2 * n);
    for _ in 0..n {
        features.push(rng.gen_range(0..=10) as f64);
        features.push(rng.gen_range(0..=3) as f64);
    }
    let max_pairs = n * (n - 1) / 2;
    let target = ((n as f64 * LOAN_MEAN_DEGREE / 2.0).round() as usize).min(max_pairs);
    let mut edges = BTreeSet::new();
    while edges.len() < target {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert(Edge::new(a, b));
        }
    }
    let g =
        Graph::from_edges(n, edges.into_iter().map(|e| (e.u, e.v)))?.with_features(2, features)?;
    let labels = (0..n)
        .map(|v| loan_rule(g.features(v)[0], g.neighbors(v).len()))
        .collect();
    g.with_labels(labels, vec![false; n], Some(2))
}

/// Marks a random `train_fraction` of the nodes for training.
pub fn random_split(g: Graph, train_fraction: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::input(format!(
            "train fraction {train_fraction} outside [0, 1]"
        )));
    }
    let n = g.node_count();
    let mut order: Vec<NodeId> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SPLIT_STREAM);
    order.shuffle(&mut rng);
    let k = (train_fraction * n as f64).round() as usize;
    let mut mask = vec![false; n];
    for &v in &order[..k] {
        mask[v] = true;
    }
    g.with_train_mask(mask)
}

const SPLIT_STREAM: u64 = 0x5eed_5017;
