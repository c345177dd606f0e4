//! Additive neighborhood models, their closed-form flip conditions checked by
//! enumeration, and exhaustive counterfactual oracles for small graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::candidates::deletion_candidates;
use crate::datasets::loan_rule;
use crate::error::{Error, Result};
use crate::gnn::{grad_wrt_adjacency, GcnModel, LocalGraph, NodeClassifier};
use crate::graph::{Edge, Edit, Graph, NodeId, Perturbation, PerturbedView};

/// `s(v) = bias + Σ_u w_vu r_u`; the model predicts `y` iff `s > 0`.
/// Adding the edge to candidate `u` lowers the score by `candidate_gains[u]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveModel {
    pub bias: f64,
    pub neighbor_weights: Vec<f64>,
    pub neighbor_contributions: Vec<f64>,
    pub candidate_gains: Vec<f64>,
}

impl AdditiveModel {
    pub fn degree(&self) -> usize {
        self.neighbor_weights.len()
    }

    fn term(&self, u: usize) -> f64 {
        self.neighbor_weights[u] * self.neighbor_contributions[u]
    }

    pub fn score(&self) -> f64 {
        self.score_kept(|_| true)
    }

    /// Score with only the neighbors accepted by `kept`.
    pub fn score_kept(&self, kept: impl Fn(usize) -> bool) -> f64 {
        (0..self.degree())
            .filter(|&u| kept(u))
            .fold(self.bias, |s, u| s + self.term(u))
    }

    /// Non-negative weights and contributions on every incident edge.
    pub fn homophilous(&self) -> bool {
        self.neighbor_weights
            .iter()
            .chain(&self.neighbor_contributions)
            .all(|&x| x >= 0.0)
    }

    fn check(&self) -> Result<()> {
        if self.neighbor_weights.len() != self.neighbor_contributions.len() {
            return Err(Error::input(
                "neighbor weights and contributions differ in length",
            ));
        }
        if self.candidate_gains.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::input("candidate gains must be positive"));
        }
        Ok(())
    }

    /// Draws bias in [−1, 1], w and r in [0, 1], and candidate gains in
    /// [γ, 2γ] for a γ drawn from (0, 0.5].
    pub fn sample<R: Rng>(rng: &mut R, max_degree: usize, max_candidates: usize) -> (Self, f64) {
        let d = rng.gen_range(1..=max_degree);
        let c = rng.gen_range(0..=max_candidates);
        let gamma = 0.5 - rng.gen_range(0.0..0.5);
        let m = AdditiveModel {
            bias: rng.gen_range(-1.0..=1.0),
            neighbor_weights: (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect(),
            neighbor_contributions: (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect(),
            candidate_gains: (0..c)
                .map(|_| gamma * (1.0 + rng.gen_range(0.0..=1.0)))
                .collect(),
        };
        (m, gamma)
    }
}

const MAX_ENUMERATED_DEGREE: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionCheck {
    /// `bias + min_u w_vu r_u > 0`
    pub condition: bool,
    /// Every deletion that leaves a neighbor keeps `s > 0`.
    pub exhaustive: bool,
    /// Kept neighbors of a flipping deletion, when one exists.
    pub witness: Option<Vec<usize>>,
}

pub fn deletion_infeasible(m: &AdditiveModel) -> Result<DeletionCheck> {
    m.check()?;
    let d = m.degree();
    if d == 0 {
        return Err(Error::input(
            "deletion infeasibility needs at least one neighbor",
        ));
    }
    if d > MAX_ENUMERATED_DEGREE {
        return Err(Error::TooLarge(format!(
            "{d} neighbors; enumeration stops at {MAX_ENUMERATED_DEGREE}"
        )));
    }
    let min_term = (0..d).map(|u| m.term(u)).fold(f64::INFINITY, f64::min);
    let condition = m.bias + min_term > 0.0;
    let mut witness = None;
    for kept in 1u32..(1 << d) {
        if m.score_kept(|u| kept >> u & 1 == 1) <= 0.0 {
            witness = Some((0..d).filter(|&u| kept >> u & 1 == 1).collect());
            break;
        }
    }
    Ok(DeletionCheck {
        condition,
        exhaustive: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditionCheck {
    /// `⌈m_v / γ⌉`, zero when the node is already on the other side.
    pub k_plus: usize,
    /// Whether the `k_plus` strongest candidates with gain at least `γ`
    /// drive the score to `≤ 0`; absent when there are fewer than `k_plus`.
    pub verified: Option<bool>,
}

pub fn addition_sufficiency_k(m: &AdditiveModel, gamma: f64) -> Result<AdditionCheck> {
    m.check()?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::input(format!("gamma = {gamma} must be positive")));
    }
    let s = m.score();
    if s <= 0.0 {
        return Ok(AdditionCheck {
            k_plus: 0,
            verified: Some(true),
        });
    }
    let k_plus = (s / gamma).ceil() as usize;
    let mut gains: Vec<f64> = m
        .candidate_gains
        .iter()
        .copied()
        .filter(|&g| g >= gamma)
        .collect();
    if gains.len() < k_plus {
        return Ok(AdditionCheck {
            k_plus,
            verified: None,
        });
    }
    gains.sort_by(|a, b| b.total_cmp(a));
    let after = gains[..k_plus].iter().fold(s, |acc, g| acc - g);
    Ok(AdditionCheck {
        k_plus,
        verified: Some(after <= 0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reachability {
    pub budget: usize,
    pub del_flips: bool,
    pub add_flips: bool,
    /// Whether the model is in the regime where additions must dominate.
    pub dominance_regime: bool,
    pub diagnostic: Option<String>,
}

impl Reachability {
    /// False only for a counterexample inside the dominance regime.
    pub fn consistent(&self) -> bool {
        !self.dominance_regime || (self.add_flips && !self.del_flips)
    }
}

/// Enumerates every graph reachable from `v`'s neighborhood with at most
/// `k` deletions, and with at most `k` additions.
pub fn budgeted_reachability(m: &AdditiveModel, k: usize, gamma: f64) -> Result<Reachability> {
    m.check()?;
    let d = m.degree();
    let c = m.candidate_gains.len();
    if d > MAX_ENUMERATED_DEGREE || c > MAX_ENUMERATED_DEGREE {
        return Err(Error::TooLarge(format!("{d} neighbors, {c} candidates")));
    }
    if !m.homophilous() {
        return Ok(Reachability {
            budget: k,
            del_flips: false,
            add_flips: false,
            dominance_regime: false,
            diagnostic: Some(
                "negative neighbor term; homophily assumption fails, checks skipped".into(),
            ),
        });
    }
    let s = m.score();
    let del_flips = (0u32..(1 << d))
        .filter(|kept| (d - kept.count_ones() as usize) <= k)
        .any(|kept| m.score_kept(|u| kept >> u & 1 == 1) <= 0.0);
    let add_flips = (0u32..(1 << c))
        .filter(|set| set.count_ones() as usize <= k)
        .any(|set| {
            (0..c)
                .filter(|&u| set >> u & 1 == 1)
                .fold(s, |acc, u| acc - m.candidate_gains[u])
                <= 0.0
        });
    let del = deletion_infeasible(m)?;
    let add = addition_sufficiency_k(m, gamma)?;
    let dominance_regime = s > 0.0
        && del.condition
        && add.verified.is_some()
        && add.k_plus < d
        && k == add.k_plus
        && m.candidate_gains.iter().all(|&g| g >= gamma);
    Ok(Reachability {
        budget: k,
        del_flips,
        add_flips,
        dominance_regime,
        diagnostic: None,
    })
}

/// `L·|E⁺|`
pub fn latent_stability_bound(lipschitz: f64, additions: usize) -> f64 {
    lipschitz * additions as f64
}

/// Last-hidden-layer embedding of `v` under `p`.
pub fn node_embedding(
    model: &GcnModel,
    g: &Graph,
    p: &Perturbation,
    v: NodeId,
) -> Result<Vec<f64>> {
    let view = PerturbedView::new(g, p);
    let local = LocalGraph::ball(&view, g, v, model.num_layers() + 1);
    let trace = local.forward(model)?;
    Ok(trace.last_hidden().row(local.index_of(v).unwrap()).to_vec())
}

/// `‖ψ(v; G) − ψ(v; G ⊕ p)‖₂` for each perturbation.
pub fn embedding_displacements(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    ps: &[Perturbation],
) -> Result<Vec<f64>> {
    let base = node_embedding(model, g, &Perturbation::new(), v)?;
    ps.iter()
        .map(|p| {
            let e = node_embedding(model, g, p, v)?;
            Ok(base
                .iter()
                .zip(&e)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt())
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub const ORACLE_LIMIT: f64 = 1e6;

/// Smallest flipping subset of `candidates` with at most `max_size` edits.
/// Sizes are tried in increasing order and subsets lexicographically over
/// the sorted candidates, so the first hit is minimum-cardinality.
pub fn brute_force_counterfactual<C: NodeClassifier + ?Sized>(
    model: &C,
    g: &Graph,
    v: NodeId,
    candidates: &[Edit],
    max_size: usize,
) -> Result<Option<Perturbation>> {
    g.check_node(v)?;
    let mut cands = candidates.to_vec();
    cands.sort();
    cands.dedup();
    let max_size = max_size.min(cands.len());
    let work = binomial(cands.len(), max_size);
    if work > ORACLE_LIMIT {
        return Err(Error::TooLarge(format!(
            "C({}, {max_size}) = {work:.0} subsets exceeds {ORACLE_LIMIT:.0}",
            cands.len()
        )));
    }
    Perturbation::from_edits(cands.iter().copied()).validate(g)?;
    let original = model.predict(g, v)?;
    for size in 1..=max_size {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let p = Perturbation::from_edits(idx.iter().map(|&i| cands[i]));
            if model.predict_perturbed(g, &p, v)? != original {
                return Ok(Some(p));
            }
            if !next_combination(&mut idx, cands.len()) {
                break;
            }
        }
    }
    Ok(None)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub const DELETION_POOL: usize = 16;

/// Looks for a deletion-only counterfactual of at most `kappa` edits among
/// the `pool` local edges with the largest margin-gradient magnitude.
pub fn deletion_only_counterfactual(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    kappa: usize,
    pool: usize,
) -> Result<Option<Perturbation>> {
    let edges = deletion_candidates(g, model.num_layers(), v)?;
    let edges = strongest_deletions(model, g, v, edges, pool)?;
    let edits: Vec<Edit> = edges.into_iter().map(Edit::Delete).collect();
    brute_force_counterfactual(model, g, v, &edits, kappa)
}

/// Keeps the `pool` edges with the largest `|∂m_v/∂A_e|`, ties by edge.
pub(crate) fn strongest_deletions(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    edges: Vec<Edge>,
    pool: usize,
) -> Result<Vec<Edge>> {
    if edges.len() <= pool {
        return Ok(edges);
    }
    let local = LocalGraph::ball(g, g, v, model.num_layers() + 1);
    let trace = local.forward(model)?;
    let row = local.index_of(v).unwrap();
    let class = crate::gnn::argmax(&trace.logits.row(row).to_vec());
    let back = grad_wrt_adjacency(model, &trace, row, class)?;
    let adj = trace.adjacency_gradient(model, &back)?;
    let mut scored: Vec<(Edge, f64)> = edges
        .into_iter()
        .map(|e| {
            let score = match (local.index_of(e.u), local.index_of(e.v)) {
                (Some(i), Some(j)) => adj.edge(i, j).abs(),
                _ => 0.0,
            };
            (e, score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().take(pool).map(|(e, _)| e).collect())
}

/// The loan approval rule as a classifier: income from feature 0, degree
/// from the (perturbed) graph.
pub struct LoanRule;

impl NodeClassifier for LoanRule {
    fn predict(&self, g: &Graph, v: NodeId) -> Result<usize> {
        Ok(loan_rule(g.features(v)[0], g.degree(v)?))
    }

    fn predict_perturbed(&self, g: &Graph, p: &Perturbation, v: NodeId) -> Result<usize> {
        let d = g.degree(v)? + p.additions.iter().filter(|e| e.touches(v)).count()
            - p.deletions.iter().filter(|e| e.touches(v)).count();
        Ok(loan_rule(g.features(v)[0], d))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// First few counterexamples, serialized.
    pub counterexamples: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn suite(
    name: &str,
    cases: usize,
    mut check: impl FnMut(usize) -> Result<Option<String>>,
) -> Result<SuiteResult> {
    let mut out = SuiteResult {
        name: name.to_string(),
        cases,
        failures: 0,
        counterexamples: Vec::new(),
    };
    for i in 0..cases {
        if let Some(cx) = check(i)? {
            out.failures += 1;
            if out.counterexamples.len() < 5 {
                out.counterexamples.push(cx);
            }
        }
    }
    Ok(out)
}

/// Runs the three proposition suites on `models` random additive models each.
pub fn run_proposition_suites<R: Rng>(rng: &mut R, models: usize) -> Result<Vec<SuiteResult>> {
    let sampled: Vec<(AdditiveModel, f64)> = (0..models)
        .map(|_| AdditiveModel::sample(rng, 10, 10))
        .collect();
    let dump = |m: &AdditiveModel| serde_json::to_string(m).unwrap_or_default();
    let deletion = suite("deletion-infeasibility", models, |i| {
        let (m, _) = &sampled[i];
        let c = deletion_infeasible(m)?;
        Ok((c.condition != c.exhaustive).then(|| dump(m)))
    })?;
    let addition = suite("addition-sufficiency", models, |i| {
        let (m, gamma) = &sampled[i];
        let c = addition_sufficiency_k(m, *gamma)?;
        Ok((c.verified == Some(false)).then(|| dump(m)))
    })?;
    let reach = suite("budgeted-reachability", models, |i| {
        let (m, gamma) = &sampled[i];
        let k = addition_sufficiency_k(m, *gamma)?.k_plus;
        let r = budgeted_reachability(m, k, *gamma)?;
        Ok((!r.consistent()).then(|| dump(m)))
    })?;
    Ok(vec![deletion, addition, reach])
}
