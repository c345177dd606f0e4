//! Undirected graphs with node features and labels, perturbations (edge
//! additions/deletions), and the structural measures used throughout:
//! degree, local clustering and k-hop neighborhoods.
//!
//! Neighbor lists are kept sorted so that traversal order, serialization and
//! hashing are deterministic.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Unordered node pair, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
}

impl Edge {
    /// Normalizes the pair. Panics on a self-loop.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        assert_ne!(a, b, "self-loops are not edges");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn try_new(a: NodeId, b: NodeId) -> Result<Self> {
        if a == b {
            return Err(Error::input(format!("self-loop on node {a}")));
        }
        Ok(Edge::new(a, b))
    }

    pub fn touches(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`. `x` must be an endpoint.
    pub fn other(&self, x: NodeId) -> NodeId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// Read access to an undirected topology. Implemented by [`Graph`] and by
/// [`PerturbedView`], which overlays a perturbation without copying.
pub trait Topology {
    fn node_count(&self) -> usize;

    fn for_each_neighbor(&self, u: NodeId, f: &mut dyn FnMut(NodeId));

    fn contains_edge(&self, a: NodeId, b: NodeId) -> bool;

    fn neighbors_of(&self, u: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.for_each_neighbor(u, &mut |w| out.push(w));
        out.sort_unstable();
        out
    }

    fn degree_of(&self, u: NodeId) -> usize {
        let mut d = 0;
        self.for_each_neighbor(u, &mut |_| d += 1);
        d
    }
}

/// Immutable undirected graph with optional node features and per-node
/// labels / train flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
    feature_dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    train_mask: Vec<bool>,
    num_classes: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate pairs collapse; self-loops
    /// and out-of-range ids are rejected. Labels default to 0, nothing is
    /// marked for training.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adj = vec![Vec::new(); node_count];
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) references a node >= node_count {node_count}"
                )));
            }
            if a == b {
                return Err(Error::input(format!("self-loop on node {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Graph {
            adj,
            edge_count: edge_count / 2,
            feature_dim: 0,
            features: Vec::new(),
            labels: vec![0; node_count],
            train_mask: vec![false; node_count],
            num_classes: 1,
        })
    }

    /// Attaches a row-major `node_count x dim` feature matrix.
    pub fn with_features(mut self, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * self.node_count() {
            return Err(Error::input(format!(
                "feature matrix has {} values, expected {} x {}",
                data.len(),
                self.node_count(),
                dim
            )));
        }
        self.feature_dim = dim;
        self.features = data;
        Ok(self)
    }

    /// Attaches labels and train flags; the class count is `max label + 1`
    /// unless a larger `num_classes` is given.
    pub fn with_labels(
        mut self,
        labels: Vec<usize>,
        train_mask: Vec<bool>,
        num_classes: Option<usize>,
    ) -> Result<Self> {
        let n = self.node_count();
        if labels.len() != n || train_mask.len() != n {
            return Err(Error::input(format!(
                "labels/train mask must have {n} entries (got {} / {})",
                labels.len(),
                train_mask.len()
            )));
        }
        let observed = labels.iter().max().map_or(1, |m| m + 1);
        let classes = num_classes.unwrap_or(observed);
        if classes < observed {
            return Err(Error::input(format!(
                "num_classes {classes} smaller than observed label range {observed}"
            )));
        }
        self.labels = labels;
        self.train_mask = train_mask;
        self.num_classes = classes.max(1);
        Ok(self)
    }

    pub fn with_train_mask(mut self, train_mask: Vec<bool>) -> Result<Self> {
        if train_mask.len() != self.node_count() {
            return Err(Error::input("train mask length mismatch"));
        }
        self.train_mask = train_mask;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.adj.len() && self.adj[a].binary_search(&b).is_ok()
    }

    /// All edges, sorted (`u < v`, then lexicographic).
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&w| w > u)
                .map(move |w| Edge { u, v: w })
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn features(&self, v: NodeId) -> &[f64] {
        &self.features[v * self.feature_dim..(v + 1) * self.feature_dim]
    }

    pub fn feature_data(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> usize {
        self.labels[v]
    }

    pub fn train_mask(&self) -> &[bool] {
        &self.train_mask
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v >= self.node_count() {
            return Err(Error::input(format!(
                "node {v} out of range (node_count {})",
                self.node_count()
            )));
        }
        Ok(())
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.check_node(v)?;
        Ok(self.adj[v].len())
    }

    /// Local clustering coefficient `2T / (d (d - 1))`, 0 when `d < 2`.
    pub fn clustering_coefficient(&self, v: NodeId) -> Result<f64> {
        self.check_node(v)?;
        Ok(clustering_in(self, v))
    }

    /// Nodes within `hops` of `v` (sorted, including `v`) and the edges of
    /// the induced subgraph.
    pub fn khop_neighborhood(&self, v: NodeId, hops: usize) -> Result<(Vec<NodeId>, Vec<Edge>)> {
        self.check_node(v)?;
        Ok(khop_neighborhood(self, v, hops))
    }

    /// Returns a new graph with `p` applied. Features and labels carry over.
    pub fn apply_perturbation(&self, p: &Perturbation) -> Result<Graph> {
        p.validate(self)?;
        let mut adj = self.adj.clone();
        for e in &p.deletions {
            adj[e.u].retain(|&w| w != e.v);
            adj[e.v].retain(|&w| w != e.u);
        }
        for e in &p.additions {
            let pos = adj[e.u].binary_search(&e.v).unwrap_err();
            adj[e.u].insert(pos, e.v);
            let pos = adj[e.v].binary_search(&e.u).unwrap_err();
            adj[e.v].insert(pos, e.u);
        }
        Ok(Graph {
            adj,
            edge_count: self.edge_count + p.additions.len() - p.deletions.len(),
            feature_dim: self.feature_dim,
            features: self.features.clone(),
            labels: self.labels.clone(),
            train_mask: self.train_mask.clone(),
            num_classes: self.num_classes,
        })
    }

    /// The subgraph induced on `nodes` (given in the order that defines the
    /// new ids), keeping features and labels.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Result<Graph> {
        let index: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            self.check_node(v)?;
            for &w in self.neighbors(v) {
                if let Some(&j) = index.get(&w) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        let mut g = Graph::from_edges(nodes.len(), edges)?;
        let mut feats = Vec::with_capacity(nodes.len() * self.feature_dim);
        for &v in nodes {
            feats.extend_from_slice(self.features(v));
        }
        g = g.with_features(self.feature_dim, feats)?;
        g.with_labels(
            nodes.iter().map(|&v| self.labels[v]).collect(),
            nodes.iter().map(|&v| self.train_mask[v]).collect(),
            Some(self.num_classes),
        )
    }
}

impl Topology for Graph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn for_each_neighbor(&self, u: NodeId, f: &mut dyn FnMut(NodeId)) {
        for &w in &self.adj[u] {
            f(w);
        }
    }

    fn contains_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.has_edge(a, b)
    }

    fn neighbors_of(&self, u: NodeId) -> Vec<NodeId> {
        self.adj[u].clone()
    }

    fn degree_of(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }
}

/// A single signed edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Edit {
    Add(Edge),
    Delete(Edge),
}

impl Edit {
    pub fn edge(&self) -> Edge {
        match *self {
            Edit::Add(e) | Edit::Delete(e) => e,
        }
    }

    pub fn is_addition(&self) -> bool {
        matches!(self, Edit::Add(_))
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::Add(e) => write!(f, "+{e}"),
            Edit::Delete(e) => write!(f, "-{e}"),
        }
    }
}

/// Edge-edit set `ΔA = ΔE⁺ ∪ ΔE⁻` relative to a base graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Perturbation {
    pub additions: BTreeSet<Edge>,
    pub deletions: BTreeSet<Edge>,
}

impl Perturbation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edits<I: IntoIterator<Item = Edit>>(edits: I) -> Self {
        let mut p = Perturbation::new();
        for e in edits {
            p.insert(e);
        }
        p
    }

    pub fn insert(&mut self, edit: Edit) {
        match edit {
            Edit::Add(e) => {
                self.additions.insert(e);
            }
            Edit::Delete(e) => {
                self.deletions.insert(e);
            }
        }
    }

    pub fn remove(&mut self, edit: &Edit) -> bool {
        match edit {
            Edit::Add(e) => self.additions.remove(e),
            Edit::Delete(e) => self.deletions.remove(e),
        }
    }

    pub fn contains(&self, edit: &Edit) -> bool {
        match edit {
            Edit::Add(e) => self.additions.contains(e),
            Edit::Delete(e) => self.deletions.contains(e),
        }
    }

    /// `‖ΔA‖₀`
    pub fn size(&self) -> usize {
        self.additions.len() + self.deletions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Edits in canonical order: additions first, then deletions.
    pub fn edits(&self) -> Vec<Edit> {
        self.additions
            .iter()
            .map(|&e| Edit::Add(e))
            .chain(self.deletions.iter().map(|&e| Edit::Delete(e)))
            .collect()
    }

    pub fn without(&self, edit: &Edit) -> Perturbation {
        let mut p = self.clone();
        p.remove(edit);
        p
    }

    /// Undoes `self` when applied to the perturbed graph.
    pub fn inverse(&self) -> Perturbation {
        Perturbation {
            additions: self.deletions.clone(),
            deletions: self.additions.clone(),
        }
    }

    /// `C·|ΔE⁺| + |ΔE⁻|`
    pub fn weighted_cost(&self, addition_cost: f64, deletion_cost: f64) -> f64 {
        addition_cost * self.additions.len() as f64 + deletion_cost * self.deletions.len() as f64
    }

    /// Checks legality against the base graph.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        for e in &self.additions {
            g.check_node(e.v)?;
            if g.has_edge(e.u, e.v) {
                return Err(Error::contract(format!("addition {e} already exists")));
            }
        }
        for e in &self.deletions {
            g.check_node(e.v)?;
            if !g.has_edge(e.u, e.v) {
                return Err(Error::contract(format!("deletion {e} is not an edge")));
            }
        }
        if let Some(e) = self.additions.intersection(&self.deletions).next() {
            return Err(Error::contract(format!("{e} both added and deleted")));
        }
        Ok(())
    }

    /// Endpoints of every edit, sorted and deduplicated.
    pub fn endpoints(&self) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self
            .additions
            .iter()
            .chain(self.deletions.iter())
            .flat_map(|e| [e.u, e.v])
            .collect();
        set.into_iter().collect()
    }
}

/// A graph seen through a perturbation, without materializing it.
pub struct PerturbedView<'a> {
    base: &'a Graph,
    deleted: HashSet<Edge>,
    added: HashMap<NodeId, Vec<NodeId>>,
}

impl<'a> PerturbedView<'a> {
    /// `p` is assumed legal for `base` (see [`Perturbation::validate`]).
    pub fn new(base: &'a Graph, p: &Perturbation) -> Self {
        let mut added: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for e in &p.additions {
            added.entry(e.u).or_default().push(e.v);
            added.entry(e.v).or_default().push(e.u);
        }
        PerturbedView {
            base,
            deleted: p.deletions.iter().copied().collect(),
            added,
        }
    }

    pub fn base(&self) -> &Graph {
        self.base
    }
}

impl Topology for PerturbedView<'_> {
    fn node_count(&self) -> usize {
        self.base.node_count()
    }

    fn for_each_neighbor(&self, u: NodeId, f: &mut dyn FnMut(NodeId)) {
        for &w in self.base.neighbors(u) {
            if self.deleted.is_empty() || !self.deleted.contains(&Edge::new(u, w)) {
                f(w);
            }
        }
        if let Some(extra) = self.added.get(&u) {
            for &w in extra {
                f(w);
            }
        }
    }

    fn contains_edge(&self, a: NodeId, b: NodeId) -> bool {
        if a == b {
            return false;
        }
        if self.base.has_edge(a, b) {
            !self.deleted.contains(&Edge::new(a, b))
        } else {
            self.added.get(&a).is_some_and(|l| l.contains(&b))
        }
    }
}

/// Number of triangles through `v`.
pub fn triangles_in<T: Topology + ?Sized>(t: &T, v: NodeId) -> usize {
    let nb = t.neighbors_of(v);
    let mut count = 0;
    for i in 0..nb.len() {
        for j in i + 1..nb.len() {
            if t.contains_edge(nb[i], nb[j]) {
                count += 1;
            }
        }
    }
    count
}

pub fn clustering_in<T: Topology + ?Sized>(t: &T, v: NodeId) -> f64 {
    let d = t.degree_of(v);
    if d < 2 {
        return 0.0;
    }
    2.0 * triangles_in(t, v) as f64 / (d * (d - 1)) as f64
}

/// Breadth-first ball of radius `hops` around all `sources`, sorted.
pub fn ball<T: Topology + ?Sized>(t: &T, sources: &[NodeId], hops: usize) -> Vec<NodeId> {
    let mut dist: HashMap<NodeId, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == hops {
            continue;
        }
        t.for_each_neighbor(u, &mut |w| {
            if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(w) {
                slot.insert(du + 1);
                queue.push_back(w);
            }
        });
    }
    let mut nodes: Vec<NodeId> = dist.into_keys().collect();
    nodes.sort_unstable();
    nodes
}

/// Edges of `t` with both endpoints in `nodes` (sorted input), sorted.
pub fn induced_edges<T: Topology + ?Sized>(t: &T, nodes: &[NodeId]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for &u in nodes {
        t.for_each_neighbor(u, &mut |w| {
            if w > u && nodes.binary_search(&w).is_ok() {
                edges.push(Edge { u, v: w });
            }
        });
    }
    edges.sort_unstable();
    edges
}

pub fn khop_neighborhood<T: Topology + ?Sized>(
    t: &T,
    v: NodeId,
    hops: usize,
) -> (Vec<NodeId>, Vec<Edge>) {
    let nodes = ball(t, &[v], hops);
    let edges = induced_edges(t, &nodes);
    (nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    #[test]
    fn degree_examples() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(g.degree(2).unwrap(), 0);
        assert_eq!(star(4).degree(0).unwrap(), 4);
        let t = triangle();
        for v in 0..3 {
            assert_eq!(t.degree(v).unwrap(), 2);
        }
        assert!(matches!(t.degree(3), Err(Error::Input(_))));
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(triangle().clustering_coefficient(0).unwrap(), 1.0);
        assert_eq!(star(4).clustering_coefficient(0).unwrap(), 0.0);
        // v=0 with neighbors {1,2,3}, only (1,2) connected
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        assert!((g.clustering_coefficient(0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(g.clustering_coefficient(9).is_err());
    }

    #[test]
    fn khop_examples() {
        let path = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (nodes, edges) = path.khop_neighborhood(1, 1).unwrap();
        assert_eq!(nodes, vec![0, 1, 2]);
        assert_eq!(edges, vec![Edge::new(0, 1), Edge::new(1, 2)]);
        let (nodes, edges) = path.khop_neighborhood(1, 3).unwrap();
        assert_eq!(nodes, vec![0, 1, 2, 3]);
        assert_eq!(edges.len(), 3);
        let lonely = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(lonely.khop_neighborhood(2, 5).unwrap(), (vec![2], vec![]));
        assert!(path.khop_neighborhood(4, 1).is_err());
    }

    #[test]
    fn apply_examples() {
        let t = triangle();
        assert_eq!(t.apply_perturbation(&Perturbation::new()).unwrap(), t);

        let mut p = Perturbation::new();
        p.insert(Edit::Delete(Edge::new(0, 1)));
        let q = t.apply_perturbation(&p).unwrap();
        assert_eq!(
            q.edges().collect::<Vec<_>>(),
            vec![Edge::new(0, 2), Edge::new(1, 2)]
        );
        // base unmodified
        assert!(t.has_edge(0, 1));

        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let p = Perturbation::from_edits([Edit::Add(Edge::new(0, 2))]);
        let q = g.apply_perturbation(&p).unwrap();
        assert_eq!(q.degree(0).unwrap(), 2);
        assert_eq!(q.edge_count(), 2);
    }

    #[test]
    fn illegal_perturbations_rejected() {
        let t = triangle();
        let add_existing = Perturbation::from_edits([Edit::Add(Edge::new(0, 1))]);
        assert!(matches!(
            t.apply_perturbation(&add_existing),
            Err(Error::Contract(_))
        ));
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let del_missing = Perturbation::from_edits([Edit::Delete(Edge::new(1, 2))]);
        assert!(matches!(
            g.apply_perturbation(&del_missing),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn perturbed_view_matches_materialized() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]).unwrap();
        let p = Perturbation::from_edits([
            Edit::Delete(Edge::new(0, 2)),
            Edit::Add(Edge::new(0, 4)),
            Edit::Add(Edge::new(1, 3)),
        ]);
        let view = PerturbedView::new(&g, &p);
        let real = g.apply_perturbation(&p).unwrap();
        for v in 0..5 {
            assert_eq!(view.neighbors_of(v), real.neighbors(v));
            assert_eq!(clustering_in(&view, v), clustering_in(&real, v));
            for w in 0..5 {
                assert_eq!(view.contains_edge(v, w), real.has_edge(v, w));
            }
        }
    }

    #[test]
    fn from_edges_validation() {
        assert!(Graph::from_edges(2, [(0, 0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 2)]).is_err());
        let g = Graph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn graph_and_edits() -> impl Strategy<Value = (Graph, Perturbation)> {
        (3usize..9).prop_flat_map(|n| {
            let pairs = proptest::collection::vec((0..n, 0..n), 0..20);
            let flips = proptest::collection::vec((0..n, 0..n), 0..6);
            (Just(n), pairs, flips).prop_map(|(n, pairs, flips)| {
                let g = Graph::from_edges(n, pairs.into_iter().filter(|(a, b)| a != b)).unwrap();
                let p = Perturbation::from_edits(flips.into_iter().filter(|(a, b)| a != b).map(
                    |(a, b)| {
                        let e = Edge::new(a, b);
                        if g.has_edge(a, b) {
                            Edit::Delete(e)
                        } else {
                            Edit::Add(e)
                        }
                    },
                ));
                (g, p)
            })
        })
    }

    proptest! {
        #[test]
        fn inverse_restores_graph((g, p) in graph_and_edits()) {
            let q = g.apply_perturbation(&p).unwrap();
            prop_assert_eq!(q.edge_count() + p.deletions.len(), g.edge_count() + p.additions.len());
            prop_assert_eq!(q.apply_perturbation(&p.inverse()).unwrap(), g);
        }

        #[test]
        fn view_agrees_with_materialized((g, p) in graph_and_edits()) {
            let view = PerturbedView::new(&g, &p);
            let real = g.apply_perturbation(&p).unwrap();
            let degrees: usize = (0..real.node_count()).map(|v| real.degree(v).unwrap()).sum();
            prop_assert_eq!(degrees, 2 * real.edge_count());
            for v in 0..g.node_count() {
                prop_assert_eq!(view.neighbors_of(v), real.neighbors(v));
                prop_assert_eq!(triangles_in(&view, v), triangles_in(&real, v));
                let c = clustering_in(&real, v);
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}
