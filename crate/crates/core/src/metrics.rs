//! Evaluation metrics over per-target records, and similarity between small
//! edge sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::baselines::attack_only_addition;
use crate::candidates::{cosine, margin_gradients, rank_negative};
use crate::error::{Error, Result};
use crate::explain::{Method, TargetRecord};
use crate::gnn::{predict_perturbed, GcnModel, LocalGraph};
use crate::graph::{Edge, Edit, Graph, NodeId, Perturbation};
use crate::theory::{brute_force_counterfactual, strongest_deletions};

/// `(1/N) Σ 1[ŷ'_i ≠ ŷ_i]`
pub fn misclassification_rate(records: &[TargetRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.success).count() as f64 / records.len() as f64
}

/// Mean drop of the original-class probability, from the stored values.
pub fn fidelity_of(records: &[TargetRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records
        .iter()
        .map(|r| r.original_prob - r.perturbed_prob)
        .sum::<f64>()
        / records.len() as f64
}

/// Mean drop of the original-class probability, recomputed with `model`.
pub fn fidelity(model: &GcnModel, g: &Graph, records: &[TargetRecord]) -> Result<f64> {
    if records.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for r in records {
        let before = model.predict_node(g, r.target)?;
        let c = before.predicted_class;
        let after = predict_perturbed(model, g, &r.perturbation(), r.target)?;
        total += before.class_probs[c] - after.class_probs[c];
    }
    Ok(total / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplanationSize {
    pub total: f64,
    pub additions: f64,
    pub deletions: f64,
}

/// Mean edit counts over successful records; `None` without successes.
pub fn explanation_size(records: &[TargetRecord]) -> Option<ExplanationSize> {
    let ok: Vec<&TargetRecord> = records.iter().filter(|r| r.success).collect();
    if ok.is_empty() {
        return None;
    }
    let n = ok.len() as f64;
    let adds = ok.iter().map(|r| r.additions.len()).sum::<usize>() as f64 / n;
    let dels = ok.iter().map(|r| r.deletions.len()).sum::<usize>() as f64 / n;
    Some(ExplanationSize {
        total: adds + dels,
        additions: adds,
        deletions: dels,
    })
}

/// `2·(1 − σ(k·L))`, in (0, 1] for `L ≥ 0`.
pub fn plausibility_score(l_plau: f64, k: f64) -> f64 {
    2.0 * (1.0 - 1.0 / (1.0 + (-k * l_plau).exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: Option<Method>,
    pub n_targets: usize,
    pub n_successes: usize,
    pub misclassification_rate: f64,
    pub fidelity: f64,
    pub mean_explanation_size: Option<f64>,
    pub mean_additions: Option<f64>,
    pub mean_deletions: Option<f64>,
    /// Over successful records.
    pub mean_plausibility: Option<f64>,
    pub mean_time_seconds: f64,
}

impl EvaluationReport {
    /// `times[i]` belongs to `records[i]`.
    pub fn from_records(records: &[TargetRecord], times: &[f64]) -> Result<Self> {
        if times.len() != records.len() {
            return Err(Error::contract("one timing per record required"));
        }
        let methods: BTreeSet<Method> = records.iter().map(|r| r.method).collect();
        let size = explanation_size(records);
        let ok: Vec<&TargetRecord> = records.iter().filter(|r| r.success).collect();
        Ok(EvaluationReport {
            method: (methods.len() == 1).then(|| *methods.iter().next().unwrap()),
            n_targets: records.len(),
            n_successes: ok.len(),
            misclassification_rate: misclassification_rate(records),
            fidelity: fidelity_of(records),
            mean_explanation_size: size.map(|s| s.total),
            mean_additions: size.map(|s| s.additions),
            mean_deletions: size.map(|s| s.deletions),
            mean_plausibility: (!ok.is_empty())
                .then(|| ok.iter().map(|r| r.plausibility).sum::<f64>() / ok.len() as f64),
            mean_time_seconds: if times.is_empty() {
                0.0
            } else {
                times.iter().sum::<f64>() / times.len() as f64
            },
        })
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub ged: f64,
    pub mcs: f64,
    pub gev: f64,
}

/// Small simple graph on the endpoints of an edge set, nodes in id order.
struct Small {
    n: usize,
    adj: Vec<Vec<bool>>,
    m: usize,
}

impl Small {
    fn from_edges(edges: &BTreeSet<Edge>) -> Self {
        let nodes: Vec<NodeId> = edges
            .iter()
            .flat_map(|e| [e.u, e.v])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let idx: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = nodes.len();
        let mut adj = vec![vec![false; n]; n];
        for e in edges {
            let (a, b) = (idx[&e.u], idx[&e.v]);
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Small {
            n,
            adj,
            m: edges.len(),
        }
    }

    fn degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&x| x).count()
    }
}

/// Unit-cost graph edit distance between unlabeled graphs. Nodes of the
/// smaller graph are padded with isolated dummies, so the distance is
/// `|n_a − n_b| + m_a + m_b − 2·max_π common(π)` over bijections `π`.
fn edit_distance(a: &Small, b: &Small) -> usize {
    let (a, b) = if a.n <= b.n { (a, b) } else { (b, a) };
    let n = b.n;
    // visit a's nodes by decreasing degree to tighten the bound early
    let mut order: Vec<usize> = (0..a.n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(a.degree(i)));
    let mut best = 0usize;
    let mut map = vec![usize::MAX; a.n];
    let mut used = vec![false; n];
    search(a, b, &order, 0, 0, a.m, &mut map, &mut used, &mut best);
    (b.n - a.n) + a.m + b.m - 2 * best
}

/// Branch and bound over injections of `a`'s nodes into `b`'s. `left` counts
/// `a`'s edges with an endpoint still unmapped, an upper bound on what the
/// remaining assignments can add.
#[allow(clippy::too_many_arguments)]
fn search(
    a: &Small,
    b: &Small,
    order: &[usize],
    depth: usize,
    common: usize,
    left: usize,
    map: &mut [usize],
    used: &mut [bool],
    best: &mut usize,
) {
    if common > *best {
        *best = common;
    }
    if depth == order.len() || common + left <= *best || *best == a.m.min(b.m) {
        return;
    }
    let i = order[depth];
    let mapped: Vec<usize> = order[..depth].to_vec();
    let closing = mapped.iter().filter(|&&k| a.adj[i][k]).count();
    for j in 0..b.n {
        if used[j] {
            continue;
        }
        let gained = mapped
            .iter()
            .filter(|&&k| a.adj[i][k] && b.adj[j][map[k]])
            .count();
        map[i] = j;
        used[j] = true;
        search(
            a,
            b,
            order,
            depth + 1,
            common + gained,
            left - closing,
            map,
            used,
            best,
        );
        used[j] = false;
        map[i] = usize::MAX;
    }
}

/// Mean-pooled last hidden layer of the model run on the subgraph formed by
/// `edges` alone.
fn pooled_embedding(model: &GcnModel, g: &Graph, edges: &BTreeSet<Edge>) -> Result<Vec<f64>> {
    let nodes: Vec<NodeId> = edges
        .iter()
        .flat_map(|e| [e.u, e.v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sub = Graph::from_edges(g.node_count(), edges.iter().map(|e| (e.u, e.v)))?;
    let local = LocalGraph::induced(&sub, g, nodes);
    let trace = local.forward(model)?;
    let h = trace.last_hidden();
    let mut mean = vec![0.0; h.ncols()];
    for row in h.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    let n = h.nrows() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// GED (normalized by `|V_a| + |V_b| + |E_a| + |E_b|`), MCS (shared edges
/// over the larger set) and GEV (cosine of pooled embeddings) of two edge
/// sets of `g`. Either side empty gives `(1, 0, 0)`.
pub fn graph_similarity(model: &GcnModel, g: &Graph, a: &[Edge], b: &[Edge]) -> Result<Similarity> {
    let a: BTreeSet<Edge> = a.iter().copied().collect();
    let b: BTreeSet<Edge> = b.iter().copied().collect();
    if a.is_empty() || b.is_empty() {
        return Ok(Similarity {
            ged: 1.0,
            mcs: 0.0,
            gev: 0.0,
        });
    }
    for e in a.iter().chain(&b) {
        g.check_node(e.v)?;
    }
    let (sa, sb) = (Small::from_edges(&a), Small::from_edges(&b));
    let ged = edit_distance(&sa, &sb) as f64 / (sa.n + sb.n + sa.m + sb.m) as f64;
    let mcs = a.intersection(&b).count() as f64 / a.len().max(b.len()) as f64;
    let gev = cosine(
        &pooled_embedding(model, g, &a)?,
        &pooled_embedding(model, g, &b)?,
    );
    Ok(Similarity { ged, mcs, gev })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis1Row {
    pub target: NodeId,
    pub attack_success: bool,
    pub attack: Vec<Edge>,
    /// Minimum counterfactual on the shared candidate space, if any.
    pub counterfactual: Option<Perturbation>,
    pub similarity: Option<Similarity>,
}

/// Candidate space shared by the attack and the oracle: the top additions
/// and deletions by gradient, plus whatever the attack picked.
pub const H1_POOL: usize = 8;

/// For each target, compares a flip-and-stop attack with the exhaustive
/// minimum counterfactual over the same candidate space.
pub fn hypothesis1_experiment(
    model: &GcnModel,
    g: &Graph,
    targets: &[NodeId],
    budget: usize,
    far_pool: usize,
    seed: u64,
) -> Result<Vec<Hypothesis1Row>> {
    let mut rows = Vec::with_capacity(targets.len());
    for &v in targets {
        let class = model.predict_node(g, v)?.predicted_class;
        let attack = attack_only_addition(model, g, v, budget, false, far_pool, seed)?;
        let attack_success = predict_perturbed(model, g, &attack, v)?.predicted_class != class;
        let (adds, _) = margin_gradients(model, g, v, None, far_pool, seed)?;
        let mut space: BTreeSet<Edit> = rank_negative(adds, H1_POOL)
            .ranked
            .into_iter()
            .map(|(e, _)| Edit::Add(e))
            .collect();
        space.extend(attack.edits());
        let dels = crate::candidates::deletion_candidates(g, model.num_layers(), v)?;
        space.extend(
            strongest_deletions(model, g, v, dels, H1_POOL)?
                .into_iter()
                .map(Edit::Delete),
        );
        let space: Vec<Edit> = space.into_iter().collect();
        let counterfactual = brute_force_counterfactual(model, g, v, &space, budget)?;
        let attack_edges: Vec<Edge> = attack.additions.iter().copied().collect();
        let similarity = match &counterfactual {
            Some(cf) => {
                let cf_edges: Vec<Edge> = cf.edits().iter().map(|e| e.edge()).collect();
                Some(graph_similarity(model, g, &attack_edges, &cf_edges)?)
            }
            None => None,
        };
        rows.push(Hypothesis1Row {
            target: v,
            attack_success,
            attack: attack_edges,
            counterfactual,
            similarity,
        });
    }
    Ok(rows)
}
