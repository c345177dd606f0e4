use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::model::{feature_matrix, full_adjacency, log_sum_exp, ForwardTrace, GcnModel};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainOptimizer {
    /// Plain full-batch gradient descent.
    Sgd,
    /// Full-batch Adam (β = 0.9, 0.999).
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: TrainOptimizer,
    /// L2 penalty on weights (not biases).
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 1000,
            seed: 102,
            optimizer: TrainOptimizer::Adam,
            weight_decay: 5e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training NLL before each update, then once more after the last.
    pub losses: Vec<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Mean NLL over the masked rows and its gradient w.r.t. the logits.
pub fn masked_nll(trace: &ForwardTrace, labels: &[usize], mask: &[bool]) -> (f64, Array2<f64>) {
    let count = mask.iter().filter(|&&m| m).count().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = Array2::zeros(trace.logits.dim());
    for (i, (&y, &m)) in labels.iter().zip(mask).enumerate() {
        if !m {
            continue;
        }
        let z = trace.logits.row(i);
        loss += log_sum_exp(z.iter().copied()) - z[y];
        let mut g = grad.row_mut(i);
        g.assign(&trace.probs.row(i));
        g[y] -= 1.0;
        g /= count;
    }
    (loss / count, grad)
}

pub fn accuracy(model: &GcnModel, g: &Graph, mask: &[bool]) -> Result<f64> {
    let preds = model.predict_all(g)?;
    let idx: Vec<usize> = (0..g.node_count()).filter(|&v| mask[v]).collect();
    if idx.is_empty() {
        return Ok(0.0);
    }
    let hits = idx
        .iter()
        .filter(|&&v| preds[v].predicted_class == g.label(v))
        .count();
    Ok(hits as f64 / idx.len() as f64)
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Full-batch training on the labelled (train-mask) nodes.
pub fn train(model: &mut GcnModel, g: &Graph, cfg: &TrainConfig) -> Result<TrainReport> {
    if !(cfg.learning_rate > 0.0) || !cfg.learning_rate.is_finite() {
        return Err(Error::input(format!(
            "learning rate {} must be positive",
            cfg.learning_rate
        )));
    }
    let mask = g.train_mask().to_vec();
    if !mask.iter().any(|&m| m) {
        return Err(Error::input("graph has no labelled training nodes"));
    }
    if g.labels().iter().any(|&y| y >= model.class_count()) {
        return Err(Error::contract("label outside the model's class range"));
    }
    let adj = full_adjacency(g)?;
    let x = feature_matrix(g, &(0..g.node_count()).collect::<Vec<_>>());
    let n_params: usize = model.weights.iter().map(|w| w.len()).sum::<usize>()
        + model.biases.iter().map(|b| b.len()).sum::<usize>();
    let mut adam = AdamState {
        m: vec![0.0; n_params],
        v: vec![0.0; n_params],
        t: 0,
    };
    let mut losses = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..=cfg.epochs {
        let trace = model.forward(&adj, &x)?;
        let (mut loss, d_logits) = masked_nll(&trace, g.labels(), &mask);
        loss += 0.5
            * cfg.weight_decay
            * model
                .weights
                .iter()
                .map(|w| w.iter().map(|a| a * a).sum::<f64>())
                .sum::<f64>();
        if !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "training loss is {loss} at epoch {epoch}"
            )));
        }
        losses.push(loss);
        if epoch == cfg.epochs {
            break;
        }
        let mut back = model.backward(&trace, &d_logits)?;
        for (dw, w) in back.weights.iter_mut().zip(&model.weights) {
            dw.scaled_add(cfg.weight_decay, w);
        }
        apply_update(model, &back.weights, &back.biases, cfg, &mut adam);
    }
    Ok(TrainReport {
        losses,
        train_accuracy: accuracy(model, g, &mask)?,
        test_accuracy: accuracy(model, g, &mask.iter().map(|m| !m).collect::<Vec<_>>())?,
    })
}

fn apply_update(
    model: &mut GcnModel,
    dw: &[Array2<f64>],
    db: &[Array1<f64>],
    cfg: &TrainConfig,
    adam: &mut AdamState,
) {
    let lr = cfg.learning_rate;
    match cfg.optimizer {
        TrainOptimizer::Sgd => {
            for (w, d) in model.weights.iter_mut().zip(dw) {
                w.scaled_add(-lr, d);
            }
            for (b, d) in model.biases.iter_mut().zip(db) {
                b.scaled_add(-lr, d);
            }
        }
        TrainOptimizer::Adam => {
            let (b1, b2, eps) = (0.9, 0.999, 1e-8);
            adam.t += 1;
            let c1 = 1.0 - f64::powi(b1, adam.t);
            let c2 = 1.0 - f64::powi(b2, adam.t);
            let params = model
                .weights
                .iter_mut()
                .flat_map(|w| w.iter_mut())
                .chain(model.biases.iter_mut().flat_map(|b| b.iter_mut()));
            let grads = dw
                .iter()
                .flat_map(|d| d.iter())
                .chain(db.iter().flat_map(|d| d.iter()));
            for (k, (p, &g)) in params.zip(grads).enumerate() {
                adam.m[k] = b1 * adam.m[k] + (1.0 - b1) * g;
                adam.v[k] = b2 * adam.v[k] + (1.0 - b2) * g * g;
                *p -= lr * (adam.m[k] / c1) / ((adam.v[k] / c2).sqrt() + eps);
            }
        }
    }
}
