//! A small GCN with hand-written backward passes, including gradients with
//! respect to (weighted) adjacency entries.

mod adjacency;
mod local;
mod model;
mod persist;
mod train;

pub use adjacency::{normalize_dense, NormalizedAdjacency};
pub use local::{predict_perturbed, LocalGraph};
pub use model::{
    argmax, class_margin, feature_matrix, full_adjacency, input_width, log_sum_exp, runner_up,
    softmax, softmax_rows, AdjacencyGradient, Backward, ForwardTrace, GcnModel, Prediction,
};
pub use persist::{format_model, load_model, parse_model, save_model};
pub use train::{accuracy, masked_nll, train, TrainConfig, TrainOptimizer, TrainReport};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Perturbation};

/// Logit gradient of the margin `z_c − z_r` of local row `row`, where `r` is
/// the strongest class other than `class`.
pub fn margin_logit_grad(trace: &ForwardTrace, row: usize, class: usize) -> Result<Array2<f64>> {
    let (n, c) = trace.logits.dim();
    if row >= n || class >= c || c < 2 {
        return Err(Error::contract(format!(
            "row {row} / class {class} outside {n}x{c} logits"
        )));
    }
    let z = trace.logits.row(row).to_vec();
    let mut d = Array2::zeros((n, c));
    d[[row, class]] = 1.0;
    d[[row, runner_up(&z, class)]] = -1.0;
    Ok(d)
}

/// Backward pass of the margin of `class` at local row `row`; feed the result
/// to [`ForwardTrace::adjacency_gradient`] for `∂m/∂A_e`.
pub fn grad_wrt_adjacency(
    model: &GcnModel,
    trace: &ForwardTrace,
    row: usize,
    class: usize,
) -> Result<Backward> {
    model.backward(trace, &margin_logit_grad(trace, row, class)?)
}

/// Anything that maps a (possibly perturbed) graph to a class for a node.
pub trait NodeClassifier: Sync {
    fn predict(&self, g: &Graph, v: NodeId) -> Result<usize>;
    fn predict_perturbed(&self, g: &Graph, p: &Perturbation, v: NodeId) -> Result<usize>;
}

impl NodeClassifier for GcnModel {
    fn predict(&self, g: &Graph, v: NodeId) -> Result<usize> {
        Ok(self.predict_node(g, v)?.predicted_class)
    }

    fn predict_perturbed(&self, g: &Graph, p: &Perturbation, v: NodeId) -> Result<usize> {
        Ok(predict_perturbed(self, g, p, v)?.predicted_class)
    }
}
