use std::collections::HashMap;

use ndarray::Array2;

use super::adjacency::NormalizedAdjacency;
use super::model::{feature_matrix, ForwardTrace, GcnModel, Prediction};
use crate::error::Result;
use crate::graph::{ball, induced_edges, Graph, NodeId, Perturbation, PerturbedView, Topology};

/// An induced subgraph with a fixed local node ordering, ready for forward
/// passes.
#[derive(Debug, Clone)]
pub struct LocalGraph {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    edges: Vec<(usize, usize)>,
    features: Array2<f64>,
}

impl LocalGraph {
    /// `nodes` must be sorted; `features` supplies node attributes (the
    /// base graph when `t` is a perturbed view).
    pub fn induced<T: Topology + ?Sized>(t: &T, features: &Graph, nodes: Vec<NodeId>) -> Self {
        let index: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges = induced_edges(t, &nodes)
            .into_iter()
            .map(|e| (index[&e.u], index[&e.v]))
            .collect();
        let x = feature_matrix(features, &nodes);
        LocalGraph {
            nodes,
            index,
            edges,
            features: x,
        }
    }

    pub fn ball<T: Topology + ?Sized>(t: &T, features: &Graph, v: NodeId, hops: usize) -> Self {
        Self::induced(t, features, ball(t, &[v], hops))
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, v: NodeId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Local edge pairs `(i, j)`, `i < j` in local ids.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn forward(&self, model: &GcnModel) -> Result<ForwardTrace> {
        let w: Vec<_> = self.edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        self.forward_weighted(model, &w)
    }

    /// Forward pass with an explicit weighted edge list over local ids.
    pub fn forward_weighted(
        &self,
        model: &GcnModel,
        edges: &[(usize, usize, f64)],
    ) -> Result<ForwardTrace> {
        let adj = NormalizedAdjacency::from_weighted_edges(self.len(), edges)?;
        model.forward(&adj, &self.features)
    }
}

/// Prediction for `v` on `g` with perturbation `p` applied.
pub fn predict_perturbed(
    model: &GcnModel,
    g: &Graph,
    p: &Perturbation,
    v: NodeId,
) -> Result<Prediction> {
    g.check_node(v)?;
    let view = PerturbedView::new(g, p);
    let local = LocalGraph::ball(&view, g, v, model.num_layers() + 1);
    let trace = local.forward(model)?;
    Ok(Prediction::from_logits(
        v,
        trace.logits.row(local.index_of(v).unwrap()),
    ))
}
