//! Signed-mask counterfactual search: threshold, budgeted top-κ, composite
//! loss, straight-through updates.

mod plausibility;

pub use plausibility::{loss_plau, plausibility_scope, PlauTerms, RelaxedPlausibility};

use std::collections::HashMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::candidates::{build_local_adjacency, CandidateSet, LocalProblem, Slot};
use crate::error::{Error, Result};
use crate::gnn::{argmax, log_sum_exp, predict_perturbed, softmax, GcnModel};
use crate::graph::{Edge, Edit, Graph, NodeId, Perturbation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub lambda_pred: f64,
    pub lambda_dist: f64,
    pub lambda_plau: f64,
    pub alpha_deg: f64,
    pub alpha_motif: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub kappa: usize,
    pub addition_cost: f64,
    pub deletion_cost: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Sigmoid scale of the reported plausibility score.
    pub k_plau: f64,
    pub stability_window: usize,
    /// Hold the degree normalization fixed when differentiating.
    pub freeze_normalization: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            lambda_pred: 1.5,
            lambda_dist: 0.5,
            lambda_plau: 0.5,
            alpha_deg: 1.5,
            alpha_motif: 1.0,
            tau_plus: 0.5,
            tau_minus: 0.5,
            kappa: 5,
            addition_cost: 1.0,
            deletion_cost: 1.0,
            learning_rate: 0.01,
            max_epochs: 200,
            seed: 102,
            k_plau: 1.0,
            stability_window: 5,
            freeze_normalization: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.lambda_pred,
            self.lambda_dist,
            self.lambda_plau,
            self.alpha_deg,
            self.alpha_motif,
        ];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::input("loss weights must be finite and non-negative"));
        }
        for (name, t) in [("tau_plus", self.tau_plus), ("tau_minus", self.tau_minus)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::input(format!("{name} = {t} outside (0, 1)")));
            }
        }
        if self.kappa == 0 {
            return Err(Error::input("kappa must be at least 1"));
        }
        for (name, c) in [
            ("addition_cost", self.addition_cost),
            ("deletion_cost", self.deletion_cost),
        ] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::input(format!("{name} = {c} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::input("learning rate must be positive"));
        }
        if self.stability_window == 0 {
            return Err(Error::input("stability window must be at least 1"));
        }
        Ok(())
    }
}

/// Continuous mask `M ∈ [−1, 1]^|S|` bound to a slot layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMask {
    pub values: Vec<f64>,
    /// Per slot: `true` for an addition slot.
    pub addition: Vec<bool>,
}

impl SignedMask {
    pub fn zeros(slots: &[Slot]) -> Self {
        SignedMask {
            values: vec![0.0; slots.len()],
            addition: slots.iter().map(|s| s.addition).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub epoch: usize,
    pub total: f64,
    pub pred: f64,
    pub dist: f64,
    pub plau: f64,
    pub deg_anom: f64,
    pub motif_viol: f64,
    pub flipped: bool,
}

/// `+1` above `τ⁺`, `−1` below `−τ⁻`, else 0; signs an edge cannot take
/// (adding an existing edge, deleting an absent one) become 0 and are
/// reported.
pub fn threshold_mask(mask: &SignedMask, tau_plus: f64, tau_minus: f64) -> (Vec<i8>, Vec<String>) {
    let mut notes = Vec::new();
    let hat = mask
        .values
        .iter()
        .zip(&mask.addition)
        .enumerate()
        .map(|(k, (&m, &add))| {
            let raw = if m > tau_plus {
                1
            } else if m < -tau_minus {
                -1
            } else {
                0
            };
            match (raw, add) {
                (1, false) => {
                    notes.push(format!(
                        "slot {k}: positive value {m} on an existing edge ignored"
                    ));
                    0
                }
                (-1, true) => {
                    notes.push(format!(
                        "slot {k}: negative value {m} on an absent edge ignored"
                    ));
                    0
                }
                _ => raw,
            }
        })
        .collect();
    (hat, notes)
}

/// Admits thresholded slots by descending `|M|` (ties by slot index) while
/// `C·|E⁺| + c_del·|E⁻| ≤ κ`. Returns the admitted slot indices, ascending.
pub fn topk_select(
    mask: &SignedMask,
    hat: &[i8],
    kappa: usize,
    addition_cost: f64,
    deletion_cost: f64,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..hat.len()).filter(|&k| hat[k] != 0).collect();
    order.sort_by(|&a, &b| {
        mask.values[b]
            .abs()
            .total_cmp(&mask.values[a].abs())
            .then(a.cmp(&b))
    });
    let (mut n_add, mut n_del) = (0usize, 0usize);
    let mut chosen = Vec::new();
    for k in order {
        let (a, d) = if hat[k] > 0 {
            (n_add + 1, n_del)
        } else {
            (n_add, n_del + 1)
        };
        if a as f64 * addition_cost + d as f64 * deletion_cost <= kappa as f64 {
            n_add = a;
            n_del = d;
            chosen.push(k);
        }
    }
    chosen.sort_unstable();
    chosen
}

pub fn topk_sparsify(
    mask: &SignedMask,
    hat: &[i8],
    kappa: usize,
    addition_cost: f64,
    deletion_cost: f64,
    slots: &[Slot],
) -> Perturbation {
    selection_perturbation(
        &topk_select(mask, hat, kappa, addition_cost, deletion_cost),
        slots,
    )
}

fn selection_perturbation(sel: &[usize], slots: &[Slot]) -> Perturbation {
    Perturbation::from_edits(sel.iter().map(|&k| {
        let s = slots[k];
        if s.addition {
            Edit::Add(s.edge)
        } else {
            Edit::Delete(s.edge)
        }
    }))
}

/// `−log(1 − p_c)` while `c` is still the argmax of `logits`, else 0.
pub fn pred_loss_from_logits(logits: &[f64], class: usize) -> f64 {
    if argmax(logits) != class {
        return 0.0;
    }
    let all = log_sum_exp(logits.iter().copied());
    let rest = log_sum_exp(
        logits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != class)
            .map(|(_, &z)| z),
    );
    all - rest
}

/// Logit gradient of [`pred_loss_from_logits`]: `p − q`, `q` the softmax
/// over the other classes.
fn pred_loss_logit_grad(logits: &[f64], class: usize) -> Vec<f64> {
    if argmax(logits) != class {
        return vec![0.0; logits.len()];
    }
    let p = softmax(logits);
    let mut rest = logits.to_vec();
    rest[class] = f64::NEG_INFINITY;
    let q = softmax(&rest);
    p.iter().zip(&q).map(|(a, b)| a - b).collect()
}

/// Prediction loss of `v` under `p`, relative to its clean prediction.
pub fn loss_pred(model: &GcnModel, g: &Graph, v: NodeId, p: &Perturbation) -> Result<f64> {
    let class = model.predict_node(g, v)?.predicted_class;
    let z = predict_perturbed(model, g, p, v)?.logits;
    Ok(pred_loss_from_logits(&z, class))
}

pub fn loss_dist(p: &Perturbation) -> f64 {
    p.size() as f64
}

/// `Σ |M_e|` over the slots in `active`.
pub fn relaxed_dist(mask: &SignedMask, active: &[usize]) -> f64 {
    active.iter().map(|&k| mask.values[k].abs()).sum()
}

/// `M ← clamp(M − η ∇, −1, 1)`
pub fn ste_step(mask: &mut SignedMask, grad: &[f64], eta: f64) -> Result<()> {
    if grad.len() != mask.values.len() {
        return Err(Error::contract("gradient length differs from mask length"));
    }
    if let Some(k) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite gradient {} at slot {k}",
            grad[k]
        )));
    }
    for (m, g) in mask.values.iter_mut().zip(grad) {
        *m = (*m - eta * g).clamp(-1.0, 1.0);
    }
    Ok(())
}

/// Legality against `g` plus `C·|E⁺| + |E⁻| ≤ κ`.
pub fn check_edit_set(
    g: &Graph,
    p: &Perturbation,
    kappa: usize,
    addition_cost: f64,
    deletion_cost: f64,
) -> Result<()> {
    p.validate(g)?;
    let cost = p.weighted_cost(addition_cost, deletion_cost);
    if cost > kappa as f64 {
        return Err(Error::contract(format!(
            "edit set costs {cost}, over the budget {kappa}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub target: NodeId,
    pub original_class: usize,
    pub perturbation: Perturbation,
    pub flipped: bool,
    pub history: Vec<LossBreakdown>,
    pub epochs_used: usize,
    /// Epoch the returned edit set was produced at.
    pub chosen_epoch: Option<usize>,
    /// Edit set of the last epoch evaluated.
    pub last_perturbation: Perturbation,
    /// Candidate edge per slot.
    pub slot_edges: Vec<Edge>,
    pub final_mask: Vec<f64>,
    /// `∂L/∂M` at the last epoch evaluated.
    pub final_gradient: Vec<f64>,
    pub diagnostics: Vec<String>,
}

struct Evaluation {
    breakdown: LossBreakdown,
    grad: Vec<f64>,
}

/// Everything that depends on the discrete selection alone.
#[derive(Clone)]
struct DiscretePart {
    pred: f64,
    flipped: bool,
    plau: PlauTerms,
    pred_grad: Vec<f64>,
}

struct Problem<'a> {
    model: &'a GcnModel,
    g: &'a Graph,
    cfg: &'a OptimizerConfig,
    lp: LocalProblem,
    relaxed: RelaxedPlausibility,
    class: usize,
    // selections revisit the same few edit sets once the target flips
    cache: HashMap<Vec<usize>, DiscretePart>,
}

impl Problem<'_> {
    fn discrete(&mut self, sel: &[usize], p: &Perturbation) -> Result<DiscretePart> {
        if let Some(d) = self.cache.get(sel) {
            return Ok(d.clone());
        }
        let cfg = self.cfg;
        let mut values = self.lp.base_values();
        for &k in sel {
            values[k] = 1.0 - values[k];
        }
        let trace = self
            .lp
            .local
            .forward_weighted(self.model, &self.lp.weighted_edges(&values))?;
        let row = self.lp.target_local;
        let z = trace.logits.row(row).to_vec();
        let pred = pred_loss_from_logits(&z, self.class);
        let flipped = argmax(&z) != self.class;
        let scope = plausibility_scope(self.g, self.lp.target, self.model.num_layers(), p);
        let plau = loss_plau(self.g, &scope, p, cfg.alpha_deg, cfg.alpha_motif)?;
        let mut pred_grad = vec![0.0; self.lp.slots.len()];
        if pred > 0.0 && cfg.lambda_pred > 0.0 {
            let dz = pred_loss_logit_grad(&z, self.class);
            let mut d_logits = Array2::zeros(trace.logits.dim());
            for (c, d) in dz.iter().enumerate() {
                d_logits[[row, c]] = cfg.lambda_pred * d;
            }
            let back = self.model.backward(&trace, &d_logits)?;
            let adj = trace.adjacency_gradient(self.model, &back)?;
            for (k, s) in self.lp.slots.iter().enumerate() {
                pred_grad[k] = if cfg.freeze_normalization {
                    adj.edge_frozen(s.i, s.j)
                } else {
                    adj.edge(s.i, s.j)
                };
            }
        }
        let d = DiscretePart {
            pred,
            flipped,
            plau,
            pred_grad,
        };
        self.cache.insert(sel.to_vec(), d.clone());
        Ok(d)
    }

    fn evaluate(
        &mut self,
        mask: &SignedMask,
        sel: &[usize],
        p: &Perturbation,
        epoch: usize,
    ) -> Result<Evaluation> {
        let cfg = self.cfg;
        let d = self.discrete(sel, p)?;
        let dist = loss_dist(p);
        let breakdown = LossBreakdown {
            epoch,
            total: cfg.lambda_pred * d.pred
                + cfg.lambda_dist * dist
                + cfg.lambda_plau * d.plau.plau,
            pred: d.pred,
            dist,
            plau: d.plau.plau,
            deg_anom: d.plau.deg_anom,
            motif_viol: d.plau.motif_viol,
            flipped: d.flipped,
        };
        let mut grad = d.pred_grad;
        for &k in sel {
            grad[k] += cfg.lambda_dist
                * mask.values[k].signum()
                * f64::from(u8::from(mask.values[k] != 0.0));
        }
        if cfg.lambda_plau > 0.0 {
            let w: Vec<f64> = self
                .lp
                .slots
                .iter()
                .zip(&mask.values)
                .map(|(s, &m)| {
                    let base = if s.addition { 0.0 } else { 1.0 };
                    (base + m).clamp(0.0, 1.0)
                })
                .collect();
            for (k, d) in self.relaxed.gradient(&w).into_iter().enumerate() {
                grad[k] += cfg.lambda_plau * d;
            }
        }
        Ok(Evaluation { breakdown, grad })
    }
}

/// Runs the mask optimization for `cands.target`.
pub fn optimize(
    model: &GcnModel,
    g: &Graph,
    cands: &CandidateSet,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    cfg.validate()?;
    let v = cands.target;
    let class = model.predict_node(g, v)?.predicted_class;
    let lp = build_local_adjacency(g, cands)?;
    let slot_edges: Vec<Edge> = lp.slots.iter().map(|s| s.edge).collect();
    if lp.slots.is_empty() {
        return Ok(OptimizeResult {
            target: v,
            original_class: class,
            perturbation: Perturbation::new(),
            flipped: false,
            history: Vec::new(),
            epochs_used: 0,
            chosen_epoch: None,
            last_perturbation: Perturbation::new(),
            slot_edges,
            final_mask: Vec::new(),
            final_gradient: Vec::new(),
            diagnostics: vec!["empty candidate set".to_string()],
        });
    }
    let mut relaxed_scope = crate::graph::ball(g, &[v], model.num_layers() + 1);
    relaxed_scope.extend(lp.slots.iter().flat_map(|s| [s.edge.u, s.edge.v]));
    relaxed_scope.sort_unstable();
    relaxed_scope.dedup();
    let relaxed =
        RelaxedPlausibility::new(g, &lp.slots, &relaxed_scope, cfg.alpha_deg, cfg.alpha_motif);
    let mut problem = Problem {
        model,
        g,
        cfg,
        lp,
        relaxed,
        class,
        cache: HashMap::new(),
    };
    let slots = problem.lp.slots.clone();
    let slots = &slots[..];

    let mut mask = SignedMask::zeros(slots);
    let mut history = Vec::new();
    let mut diagnostics = Vec::new();
    let mut best: Option<(Perturbation, f64, usize)> = None;
    let mut last: Option<(Perturbation, usize)> = None;
    let mut prev_sel: Option<Vec<usize>> = None;
    let mut stable = 0;
    let mut final_gradient = vec![0.0; slots.len()];
    let mut epochs_used = 0;
    let select = |m: &SignedMask| {
        let (hat, notes) = threshold_mask(m, cfg.tau_plus, cfg.tau_minus);
        (
            topk_select(m, &hat, cfg.kappa, cfg.addition_cost, cfg.deletion_cost),
            notes,
        )
    };
    for epoch in 0..cfg.max_epochs {
        let (sel, notes) = select(&mask);
        diagnostics.extend(notes.into_iter().map(|n| format!("epoch {epoch}: {n}")));
        let p = selection_perturbation(&sel, slots);
        let ev = problem.evaluate(&mask, &sel, &p, epoch)?;
        let b = ev.breakdown;
        history.push(b);
        epochs_used = epoch + 1;
        final_gradient = ev.grad.clone();
        if b.flipped {
            let better = match &best {
                None => true,
                Some((bp, bplau, _)) => {
                    p.size() < bp.size() || (p.size() == bp.size() && b.plau < *bplau)
                }
            };
            if better {
                best = Some((p.clone(), b.plau, epoch));
            }
        }
        stable = if prev_sel.as_ref() == Some(&sel) {
            stable + 1
        } else {
            1
        };
        last = Some((p, epoch));
        let mut next = mask.clone();
        ste_step(&mut next, &ev.grad, cfg.learning_rate)
            .map_err(|e| Error::Numerical(format!("target {v}, epoch {epoch}: {e}")))?;
        if b.flipped && stable >= cfg.stability_window && select(&next).0 == sel {
            break;
        }
        prev_sel = Some(sel);
        mask = next;
    }
    let last_perturbation = last.as_ref().map(|l| l.0.clone()).unwrap_or_default();
    let (perturbation, flipped, chosen_epoch) = match (best, last) {
        (Some((p, _, e)), _) => (p, true, Some(e)),
        (None, Some((p, e))) => (p, false, Some(e)),
        (None, None) => (Perturbation::new(), false, None),
    };
    check_edit_set(
        g,
        &perturbation,
        cfg.kappa,
        cfg.addition_cost,
        cfg.deletion_cost,
    )?;
    Ok(OptimizeResult {
        target: v,
        original_class: class,
        perturbation,
        flipped,
        history,
        epochs_used,
        chosen_epoch,
        last_perturbation,
        slot_edges,
        final_mask: mask.values,
        final_gradient,
        diagnostics,
    })
}
