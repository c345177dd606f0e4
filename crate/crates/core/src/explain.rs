//! Per-target explanation runs and their records.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_baseline, BaselineKind, BaselineSpec};
use crate::candidates::{build_candidates, CandidateConfig, SelectorContext};
use crate::error::{Error, Result};
use crate::gnn::{predict_perturbed, GcnModel};
use crate::graph::{Edge, Graph, NodeId, Perturbation};
use crate::metrics::plausibility_score;
use crate::optimizer::{
    loss_plau, optimize, plausibility_scope, LossBreakdown, OptimizerConfig, PlauTerms,
};
use crate::pruner::{importance_scores, prune_minimal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hybrid,
    RandomDeletion,
    GreedyGradientDeletion,
    AttackOnlyAddition,
    AttackOnlyExhaust,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Hybrid,
        Method::RandomDeletion,
        Method::GreedyGradientDeletion,
        Method::AttackOnlyAddition,
        Method::AttackOnlyExhaust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hybrid => "hybrid",
            Method::RandomDeletion => "random-deletion",
            Method::GreedyGradientDeletion => "greedy-gradient-deletion",
            Method::AttackOnlyAddition => "attack-only-addition",
            Method::AttackOnlyExhaust => "attack-only-exhaust",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            Method::Hybrid => None,
            Method::RandomDeletion => Some(BaselineKind::RandomDeletion),
            Method::GreedyGradientDeletion => Some(BaselineKind::GreedyGradientDeletion),
            Method::AttackOnlyAddition => Some(BaselineKind::AttackOnlyAddition),
            Method::AttackOnlyExhaust => Some(BaselineKind::AttackOnlyExhaust),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::input(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub method: Method,
    pub optimizer: OptimizerConfig,
    pub candidates: CandidateConfig,
    pub prune: bool,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            method: Method::Hybrid,
            optimizer: OptimizerConfig::default(),
            candidates: CandidateConfig::default(),
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningReport {
    pub size_before: usize,
    pub edges_tested: usize,
    pub edges_dropped: usize,
    pub forward_passes: usize,
}

/// Everything about one target except wall-clock time, which lives in a
/// separate sidecar so records stay byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub target: NodeId,
    pub method: Method,
    pub original_class: usize,
    pub perturbed_class: usize,
    pub success: bool,
    pub additions: Vec<Edge>,
    pub deletions: Vec<Edge>,
    /// Probability of the original class before and after the edits.
    pub original_prob: f64,
    pub perturbed_prob: f64,
    pub plau: PlauTerms,
    pub plausibility: f64,
    pub epochs_used: usize,
    pub candidates: usize,
    pub history: Vec<LossBreakdown>,
    /// The optimizer's edit set before pruning.
    pub unpruned: Option<Perturbation>,
    pub pruning: Option<PruningReport>,
    pub diagnostics: Vec<String>,
}

impl TargetRecord {
    pub fn perturbation(&self) -> Perturbation {
        Perturbation {
            additions: self.additions.iter().copied().collect(),
            deletions: self.deletions.iter().copied().collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.additions.len() + self.deletions.len()
    }
}

/// Shared per-graph state for a batch of targets.
pub struct Explainer<'a> {
    pub model: &'a GcnModel,
    pub g: &'a Graph,
    pub cfg: ExplainConfig,
    ctx: SelectorContext,
}

impl<'a> Explainer<'a> {
    pub fn new(model: &'a GcnModel, g: &'a Graph, cfg: ExplainConfig) -> Result<Self> {
        cfg.optimizer.validate()?;
        let ctx = SelectorContext::new(model, g)?;
        Ok(Explainer { model, g, cfg, ctx })
    }

    fn record(&self, v: NodeId, p: &Perturbation, base: RecordBase) -> Result<TargetRecord> {
        let o = &self.cfg.optimizer;
        let before = self.model.predict_node(self.g, v)?;
        let after = predict_perturbed(self.model, self.g, p, v)?;
        let c = before.predicted_class;
        let scope = plausibility_scope(self.g, v, self.model.num_layers(), p);
        let plau = loss_plau(self.g, &scope, p, o.alpha_deg, o.alpha_motif)?;
        Ok(TargetRecord {
            target: v,
            method: self.cfg.method,
            original_class: c,
            perturbed_class: after.predicted_class,
            success: after.predicted_class != c,
            additions: p.additions.iter().copied().collect(),
            deletions: p.deletions.iter().copied().collect(),
            original_prob: before.class_probs[c],
            perturbed_prob: after.class_probs[c],
            plausibility: plausibility_score(plau.plau, o.k_plau),
            plau,
            epochs_used: base.epochs_used,
            candidates: base.candidates,
            history: base.history,
            unpruned: base.unpruned,
            pruning: base.pruning,
            diagnostics: base.diagnostics,
        })
    }

    /// Explains one target; returns the record and the seconds it took.
    pub fn explain(&self, v: NodeId) -> Result<(TargetRecord, f64)> {
        let start = Instant::now();
        let record = match self.cfg.method.baseline() {
            Some(kind) => {
                let spec = BaselineSpec {
                    kind,
                    budget: self.cfg.optimizer.kappa,
                    seed: self.cfg.optimizer.seed,
                    far_pool: self.cfg.candidates.far_pool,
                };
                let p = run_baseline(self.model, self.g, v, &spec)?;
                self.record(v, &p, RecordBase::default())?
            }
            None => self.hybrid(v)?,
        };
        Ok((record, start.elapsed().as_secs_f64()))
    }

    fn hybrid(&self, v: NodeId) -> Result<TargetRecord> {
        let cands = build_candidates(self.model, self.g, v, &self.cfg.candidates, &self.ctx)?;
        let res = optimize(self.model, self.g, &cands, &self.cfg.optimizer)?;
        let mut base = RecordBase {
            epochs_used: res.epochs_used,
            candidates: cands.len(),
            history: res.history.clone(),
            unpruned: None,
            pruning: None,
            diagnostics: cands
                .diagnostics
                .iter()
                .chain(&res.diagnostics)
                .cloned()
                .collect(),
        };
        if !res.flipped {
            return self.record(v, &res.perturbation, base);
        }
        let mut p = res.perturbation.clone();
        if self.cfg.prune {
            let ranking = importance_scores(&res, &p)?;
            let pruned = prune_minimal(self.model, self.g, v, &p, &ranking)?;
            base.pruning = Some(PruningReport {
                size_before: p.size(),
                edges_tested: pruned.edges_tested,
                edges_dropped: pruned.removed_count,
                forward_passes: pruned.forward_passes,
            });
            base.unpruned = Some(p);
            p = pruned.perturbation;
        }
        self.record(v, &p, base)
    }

    /// Explains `targets` on up to `jobs` threads; output is in target order
    /// whatever the scheduling.
    pub fn explain_all(&self, targets: &[NodeId], jobs: usize) -> Result<Vec<(TargetRecord, f64)>> {
        let jobs = jobs.max(1).min(targets.len().max(1));
        if jobs == 1 {
            return targets.iter().map(|&v| self.explain(v)).collect();
        }
        let chunk = targets.len().div_ceil(jobs);
        let parts: Vec<Result<Vec<(TargetRecord, f64)>>> = std::thread::scope(|s| {
            let handles: Vec<_> = targets
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|&v| self.explain(v)).collect()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("explain worker panicked"))
                .collect()
        });
        let mut out = Vec::with_capacity(targets.len());
        for part in parts {
            out.extend(part?);
        }
        Ok(out)
    }
}

#[derive(Default)]
struct RecordBase {
    epochs_used: usize,
    candidates: usize,
    history: Vec<LossBreakdown>,
    unpruned: Option<Perturbation>,
    pruning: Option<PruningReport>,
    diagnostics: Vec<String>,
}

/// How the targets of a run are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSelection {
    /// Nodes the model classifies correctly.
    AllCorrect,
    /// Nodes the model gets wrong.
    Misclassified,
    Ids {
        ids: Vec<NodeId>,
    },
    /// `n` correctly classified nodes drawn with `seed`.
    Sampled {
        n: usize,
        seed: u64,
    },
}

pub fn select_targets(model: &GcnModel, g: &Graph, sel: &TargetSelection) -> Result<Vec<NodeId>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let correct = || -> Result<Vec<NodeId>> {
        let preds = model.predict_all(g)?;
        Ok((0..g.node_count())
            .filter(|&v| preds[v].predicted_class == g.label(v))
            .collect())
    };
    match sel {
        TargetSelection::AllCorrect => correct(),
        TargetSelection::Misclassified => {
            let preds = model.predict_all(g)?;
            Ok((0..g.node_count())
                .filter(|&v| preds[v].predicted_class != g.label(v))
                .collect())
        }
        TargetSelection::Ids { ids } => {
            for &v in ids {
                g.check_node(v)?;
            }
            Ok(ids.clone())
        }
        TargetSelection::Sampled { n, seed } => {
            let pool = correct()?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut picked: Vec<NodeId> = pool
                .choose_multiple(&mut rng, (*n).min(pool.len()))
                .copied()
                .collect();
            picked.sort_unstable();
            Ok(picked)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::toy;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("cf-gnn".parse::<Method>().is_err());
    }

    #[test]
    fn hybrid_record_on_toy() {
        let (g, m) = toy();
        let ex = Explainer::new(&m, &g, ExplainConfig::default()).unwrap();
        let (r, secs) = ex.explain(6).unwrap();
        assert!(secs >= 0.0);
        assert!(r.success);
        assert_eq!(r.size(), 1);
        assert!(r.perturbed_prob < 0.5 && r.original_prob > 0.5);
        let report = r.pruning.as_ref().unwrap();
        assert_eq!(report.size_before - report.edges_dropped, r.size());
        assert!((0.0..=1.0).contains(&r.plausibility));
    }

    #[test]
    fn parallel_matches_sequential() {
        let (g, m) = toy();
        let ex = Explainer::new(&m, &g, ExplainConfig::default()).unwrap();
        let targets: Vec<NodeId> = (0..7).collect();
        let seq: Vec<TargetRecord> = ex
            .explain_all(&targets, 1)
            .unwrap()
            .into_iter()
            .map(|r| r.0)
            .collect();
        let par: Vec<TargetRecord> = ex
            .explain_all(&targets, 3)
            .unwrap()
            .into_iter()
            .map(|r| r.0)
            .collect();
        assert_eq!(seq, par);
    }

    #[test]
    fn target_selection() {
        let (g, m) = toy();
        let all = select_targets(&m, &g, &TargetSelection::AllCorrect).unwrap();
        let wrong = select_targets(&m, &g, &TargetSelection::Misclassified).unwrap();
        assert_eq!(all.len() + wrong.len(), 7);
        let s = select_targets(&m, &g, &TargetSelection::Sampled { n: 3, seed: 1 }).unwrap();
        assert_eq!(s.len(), 3.min(all.len()));
        assert!(s.iter().all(|v| all.contains(v)));
        assert!(select_targets(&m, &g, &TargetSelection::Ids { ids: vec![99] }).is_err());
    }
}
