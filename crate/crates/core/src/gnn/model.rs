use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adjacency::NormalizedAdjacency;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// A `K`-layer GCN: `H^{l+1} = ReLU(Â H^l W^l + b^l)` on hidden layers, raw
/// logits on the last layer, softmax on top.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub(crate) weights: Vec<Array2<f64>>,
    pub(crate) biases: Vec<Array1<f64>>,
    pub(crate) seed: u64,
}

impl GcnModel {
    /// Glorot-uniform weights, zero biases. `dims = [d_0, h_1, ..., c]`.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::input(format!("bad layer dimensions {dims:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = dims
            .windows(2)
            .map(|w| {
                let s = (6.0 / (w[0] + w[1]) as f64).sqrt();
                Array2::from_shape_simple_fn((w[0], w[1]), || rng.gen_range(-s..=s))
            })
            .collect();
        let biases = dims[1..].iter().map(|&d| Array1::zeros(d)).collect();
        Ok(GcnModel {
            weights,
            biases,
            seed,
        })
    }

    /// Architecture for `g`: input width from its features, `hidden` layers,
    /// one output per class.
    pub fn for_graph(g: &Graph, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut dims = vec![input_width(g)];
        dims.extend_from_slice(hidden);
        dims.push(g.num_classes().max(1));
        Self::new(&dims, seed)
    }

    pub fn from_parts(
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        seed: u64,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::contract("need one bias per weight matrix"));
        }
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != b.len() {
                return Err(Error::contract(format!(
                    "layer {l}: bias length {} != {}",
                    b.len(),
                    w.ncols()
                )));
            }
            if let Some(next) = weights.get(l + 1) {
                if next.nrows() != w.ncols() {
                    return Err(Error::contract(format!(
                        "layer {l} outputs {} but layer {} takes {}",
                        w.ncols(),
                        l + 1,
                        next.nrows()
                    )));
                }
            }
        }
        Ok(GcnModel {
            weights,
            biases,
            seed,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.weights[0].nrows()];
        d.extend(self.weights.iter().map(|w| w.ncols()));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn class_count(&self) -> usize {
        self.weights[self.weights.len() - 1].ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    pub fn forward(&self, adj: &NormalizedAdjacency, x: &Array2<f64>) -> Result<ForwardTrace> {
        if x.nrows() != adj.node_count() {
            return Err(Error::contract(format!(
                "feature rows {} != adjacency size {}",
                x.nrows(),
                adj.node_count()
            )));
        }
        if x.ncols() != self.input_dim() {
            return Err(Error::contract(format!(
                "feature width {} != model input {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let k = self.num_layers();
        let mut inputs = Vec::with_capacity(k);
        let mut projected = Vec::with_capacity(k);
        let mut pre = Vec::with_capacity(k);
        let mut h = x.clone();
        for l in 0..k {
            let p = h.dot(&self.weights[l]);
            let mut q = adj.matmul(&p);
            q += &self.biases[l];
            inputs.push(h);
            projected.push(p);
            h = if l + 1 < k {
                q.mapv(|a| a.max(0.0))
            } else {
                q.clone()
            };
            pre.push(q);
        }
        let probs = softmax_rows(&h);
        Ok(ForwardTrace {
            adjacency: adj.clone(),
            inputs,
            projected,
            pre,
            logits: h,
            probs,
            dims: self.dims(),
        })
    }

    /// Backpropagates `d_logits = ∂L/∂Z` (pre-softmax) through the network.
    pub fn backward(&self, trace: &ForwardTrace, d_logits: &Array2<f64>) -> Result<Backward> {
        trace.check(self)?;
        if d_logits.dim() != trace.logits.dim() {
            return Err(Error::contract("logit gradient shape mismatch"));
        }
        let k = self.num_layers();
        let mut d_weights = vec![Array2::zeros((0, 0)); k];
        let mut d_biases = vec![Array1::zeros(0); k];
        let mut d_pre = vec![Array2::zeros((0, 0)); k];
        let mut dq = d_logits.clone();
        for l in (0..k).rev() {
            d_biases[l] = dq.sum_axis(Axis(0));
            let dp = trace.adjacency.matmul(&dq);
            d_weights[l] = trace.inputs[l].t().dot(&dp);
            let next = if l > 0 {
                let mut dh = dp.dot(&self.weights[l].t());
                dh.zip_mut_with(&trace.pre[l - 1], |g, &q| {
                    if q <= 0.0 {
                        *g = 0.0
                    }
                });
                Some(dh)
            } else {
                None
            };
            d_pre[l] = dq;
            if let Some(n) = next {
                dq = n;
            } else {
                break;
            }
        }
        Ok(Backward {
            weights: d_weights,
            biases: d_biases,
            d_pre,
        })
    }

    /// Forward over the `(K+1)`-hop ball of `v` in `g`.
    pub fn predict_node(&self, g: &Graph, v: NodeId) -> Result<Prediction> {
        g.check_node(v)?;
        let local = super::LocalGraph::ball(g, g, v, self.num_layers() + 1);
        let trace = local.forward(self)?;
        Ok(Prediction::from_logits(
            v,
            trace.logits.row(local.index_of(v).unwrap()),
        ))
    }

    /// Prediction for every node from one full-graph forward pass.
    pub fn predict_all(&self, g: &Graph) -> Result<Vec<Prediction>> {
        let adj = full_adjacency(g)?;
        let trace = self.forward(
            &adj,
            &feature_matrix(g, &(0..g.node_count()).collect::<Vec<_>>()),
        )?;
        Ok((0..g.node_count())
            .map(|v| Prediction::from_logits(v, trace.logits.row(v)))
            .collect())
    }
}

/// Gradients from [`GcnModel::backward`].
#[derive(Debug, Clone)]
pub struct Backward {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    /// `∂L/∂Q^l` for each layer's pre-activation.
    pub d_pre: Vec<Array2<f64>>,
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub adjacency: NormalizedAdjacency,
    /// `H^l`, the input of layer `l` (`H^0 = X`).
    pub inputs: Vec<Array2<f64>>,
    /// `P^l = H^l W^l`
    pub projected: Vec<Array2<f64>>,
    /// `Q^l = Â P^l + b^l`
    pub pre: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
    pub probs: Array2<f64>,
    dims: Vec<usize>,
}

impl ForwardTrace {
    fn check(&self, model: &GcnModel) -> Result<()> {
        if self.dims != model.dims() {
            return Err(Error::contract(format!(
                "trace built for dims {:?}, model has {:?}",
                self.dims,
                model.dims()
            )));
        }
        Ok(())
    }

    /// Node embeddings fed to the output layer.
    pub fn last_hidden(&self) -> &Array2<f64> {
        &self.inputs[self.inputs.len() - 1]
    }

    /// `∂L/∂a_ij` for every undirected local pair, given the layer
    /// pre-activation gradients of some loss.
    pub fn adjacency_gradient<'a>(
        &'a self,
        model: &GcnModel,
        back: &'a Backward,
    ) -> Result<AdjacencyGradient<'a>> {
        self.check(model)?;
        let adj = &self.adjacency;
        let n = adj.node_count();
        let deg = adj.degree();
        let mut grad = AdjacencyGradient {
            trace: self,
            d_pre: &back.d_pre,
            d_degree: vec![0.0; n],
        };
        for i in 0..n {
            let mut acc = 0.0;
            for (k, a) in adj.row(i) {
                if a != 0.0 {
                    acc += (grad.g_hat(i, k) + grad.g_hat(k, i)) * a;
                }
            }
            grad.d_degree[i] = -acc / (2.0 * deg[i]);
        }
        Ok(grad)
    }
}

/// Gradient of a scalar loss with respect to the symmetric entries of the
/// (weighted) local adjacency, through `Â(A)`.
pub struct AdjacencyGradient<'a> {
    trace: &'a ForwardTrace,
    d_pre: &'a [Array2<f64>],
    d_degree: Vec<f64>,
}

impl AdjacencyGradient<'_> {
    /// `∂L/∂Â_ij` with `Â` treated as a free matrix.
    fn g_hat(&self, i: usize, j: usize) -> f64 {
        self.d_pre
            .iter()
            .zip(&self.trace.projected)
            .map(|(dq, p)| dq.row(i).dot(&p.row(j)))
            .sum()
    }

    /// `∂L/∂a_ij` for the undirected weight `a_ij = a_ji`, `i != j`.
    pub fn edge(&self, i: usize, j: usize) -> f64 {
        let deg = self.trace.adjacency.degree();
        (self.g_hat(i, j) + self.g_hat(j, i)) / (deg[i] * deg[j]).sqrt()
            + self.d_degree[i]
            + self.d_degree[j]
    }

    /// Same, holding the degree normalization fixed.
    pub fn edge_frozen(&self, i: usize, j: usize) -> f64 {
        let deg = self.trace.adjacency.degree();
        (self.g_hat(i, j) + self.g_hat(j, i)) / (deg[i] * deg[j]).sqrt()
    }
}

/// Output for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub node: NodeId,
    pub logits: Vec<f64>,
    pub class_probs: Vec<f64>,
    pub predicted_class: usize,
    /// Predicted-class logit minus the best competing logit.
    pub margin: f64,
}

impl Prediction {
    pub fn from_logits(node: NodeId, logits: ndarray::ArrayView1<f64>) -> Self {
        let logits = logits.to_vec();
        let predicted_class = argmax(&logits);
        let margin = class_margin(&logits, predicted_class);
        let class_probs = softmax(&logits);
        Prediction {
            node,
            logits,
            class_probs,
            predicted_class,
            margin,
        }
    }

    /// `z_c − max_{j≠c} z_j`
    pub fn margin_for(&self, class: usize) -> f64 {
        class_margin(&self.logits, class)
    }
}

/// First index of the maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Best class other than `class` (smallest index on ties).
pub fn runner_up(logits: &[f64], class: usize) -> usize {
    let mut best = usize::MAX;
    for (j, &z) in logits.iter().enumerate() {
        if j != class && (best == usize::MAX || z > logits[best]) {
            best = j;
        }
    }
    best
}

pub fn class_margin(logits: &[f64], class: usize) -> f64 {
    if logits.len() < 2 {
        return f64::INFINITY;
    }
    logits[class] - logits[runner_up(logits, class)]
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let p = softmax(row.as_slice().unwrap());
        row.assign(&Array1::from(p));
    }
    out
}

/// `log Σ exp(z_j)` over the given entries.
pub fn log_sum_exp(z: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = z.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + z.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Model input width for `g`: featureless graphs get one constant column.
pub fn input_width(g: &Graph) -> usize {
    g.feature_dim().max(1)
}

/// Feature rows of `nodes`, in order.
pub fn feature_matrix(g: &Graph, nodes: &[NodeId]) -> Array2<f64> {
    let d = g.feature_dim();
    if d == 0 {
        return Array2::ones((nodes.len(), 1));
    }
    let mut x = Array2::zeros((nodes.len(), d));
    for (i, &v) in nodes.iter().enumerate() {
        x.row_mut(i)
            .assign(&ndarray::ArrayView1::from(g.features(v)));
    }
    x
}

pub fn full_adjacency(g: &Graph) -> Result<NormalizedAdjacency> {
    let edges: Vec<_> = g.edges().map(|e| (e.u, e.v, 1.0)).collect();
    NormalizedAdjacency::from_weighted_edges(g.node_count(), &edges)
}
