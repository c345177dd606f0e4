//! Behavioral stand-ins for deletion-only explainers and addition-only
//! attacks, sharing the optimizer's budget and legality checks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::candidates::{deletion_candidates, margin_gradients, rank_negative};
use crate::error::{Error, Result};
use crate::gnn::GcnModel;
use crate::graph::{Edit, Graph, NodeId, Perturbation};
use crate::optimizer::check_edit_set;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    RandomDeletion,
    GreedyGradientDeletion,
    /// Stops at the first flip.
    AttackOnlyAddition,
    /// Spends the whole budget, as attack tools do.
    AttackOnlyExhaust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    pub budget: usize,
    pub seed: u64,
    /// Far nodes sampled into the attack's gradient pool.
    pub far_pool: usize,
}

impl BaselineSpec {
    pub fn new(kind: BaselineKind, budget: usize, seed: u64) -> Self {
        BaselineSpec {
            kind,
            budget,
            seed,
            far_pool: 128,
        }
    }
}

/// Up to `kappa` local edges drawn uniformly without replacement.
pub fn random_deletion(
    g: &Graph,
    v: NodeId,
    depth: usize,
    kappa: usize,
    seed: u64,
) -> Result<Perturbation> {
    let edges = deletion_candidates(g, depth, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (v as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
    Ok(Perturbation::from_edits(
        edges
            .choose_multiple(&mut rng, kappa.min(edges.len()))
            .map(|&e| Edit::Delete(e)),
    ))
}

/// Deletes the local edge with the largest positive margin gradient, one at a
/// time, until `v` flips, the budget runs out, or no edge still props the
/// margin up. `None` means no budget.
pub fn greedy_gradient_deletion(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    kappa: Option<usize>,
) -> Result<Perturbation> {
    let class = model.predict_node(g, v)?.predicted_class;
    let mut p = Perturbation::new();
    let mut current = g.clone();
    while kappa.is_none_or(|k| p.size() < k) {
        let (_, dels) = margin_gradients(model, &current, v, Some(class), 0, 0)?;
        let best = dels
            .into_iter()
            .filter(|&(_, s)| s > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((e, _)) = best else { break };
        p.insert(Edit::Delete(e));
        current = g.apply_perturbation(&p)?;
        if model.predict_node(&current, v)?.predicted_class != class {
            break;
        }
    }
    Ok(p)
}

/// Adds the absent edge `(v, u)` with the most negative margin gradient, one
/// at a time. Stops at the first flip unless `exhaust`, and whenever no
/// candidate lowers the margin any more.
pub fn attack_only_addition(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    kappa: usize,
    exhaust: bool,
    far_pool: usize,
    seed: u64,
) -> Result<Perturbation> {
    let class = model.predict_node(g, v)?.predicted_class;
    let mut p = Perturbation::new();
    let mut current = g.clone();
    while p.size() < kappa {
        let (adds, _) = margin_gradients(model, &current, v, Some(class), far_pool, seed)?;
        let Some(&(e, _)) = rank_negative(adds, 1).ranked.first() else {
            break;
        };
        p.insert(Edit::Add(e));
        current = g.apply_perturbation(&p)?;
        if !exhaust && model.predict_node(&current, v)?.predicted_class != class {
            break;
        }
    }
    Ok(p)
}

pub fn run_baseline(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    spec: &BaselineSpec,
) -> Result<Perturbation> {
    if spec.budget == 0 {
        return Err(Error::input("baseline budget must be at least 1"));
    }
    let p = match spec.kind {
        BaselineKind::RandomDeletion => {
            random_deletion(g, v, model.num_layers(), spec.budget, spec.seed)?
        }
        BaselineKind::GreedyGradientDeletion => {
            greedy_gradient_deletion(model, g, v, Some(spec.budget))?
        }
        BaselineKind::AttackOnlyAddition => {
            attack_only_addition(model, g, v, spec.budget, false, spec.far_pool, spec.seed)?
        }
        BaselineKind::AttackOnlyExhaust => {
            attack_only_addition(model, g, v, spec.budget, true, spec.far_pool, spec.seed)?
        }
    };
    check_edit_set(g, &p, spec.budget, 1.0, 1.0)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::testutil::toy;
    use crate::theory::brute_force_counterfactual;
    use ndarray::{array, Array2};

    #[test]
    fn random_deletion_examples() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        assert!(random_deletion(&g, 3, 2, 5, 1).unwrap().is_empty());
        let all = random_deletion(&g, 0, 2, 10, 1).unwrap();
        assert_eq!(all.deletions.len(), 2);
        let (big, _) = toy();
        let a = random_deletion(&big, 6, 2, 3, 42).unwrap();
        assert_eq!(a, random_deletion(&big, 6, 2, 3, 42).unwrap());
        assert_eq!(a.size(), 3);
        assert!(a.additions.is_empty());
    }

    #[test]
    fn greedy_deletion_finds_single_flipping_edge() {
        let (g, m) = toy();
        let class = m.predict_node(&g, 6).unwrap().predicted_class;
        let cands: Vec<Edit> = deletion_candidates(&g, 2, 6)
            .unwrap()
            .into_iter()
            .map(Edit::Delete)
            .collect();
        let oracle = brute_force_counterfactual(&m, &g, 6, &cands, 3).unwrap();
        let p = greedy_gradient_deletion(&m, &g, 6, Some(5)).unwrap();
        assert!(p.additions.is_empty());
        let flipped = m
            .predict_node(&g.apply_perturbation(&p).unwrap(), 6)
            .unwrap()
            .predicted_class
            != class;
        assert_eq!(flipped, oracle.is_some());
        if let Some(o) = oracle {
            if o.size() == 1 {
                assert_eq!(p.size(), 1);
            }
        }
    }

    #[test]
    fn greedy_deletion_terminates_without_budget() {
        let (g, m) = toy();
        for v in 0..g.node_count() {
            let p = greedy_gradient_deletion(&m, &g, v, None).unwrap();
            assert!(p.size() <= g.edge_count());
        }
    }

    /// `class 0` everywhere: constant logits, no gradient.
    fn constant_model() -> GcnModel {
        let w: Vec<Array2<f64>> = vec![Array2::zeros((2, 2)), Array2::zeros((2, 2))];
        GcnModel::from_parts(w, vec![array![0.0, 0.0], array![1.0, 0.0]], 0).unwrap()
    }

    #[test]
    fn attack_examples() {
        let (g, m) = toy();
        let stop = attack_only_addition(&m, &g, 6, 5, false, 128, 1).unwrap();
        assert_eq!(stop, Perturbation::from_edits([Edit::Add(Edge::new(3, 6))]));
        let ex = attack_only_addition(&m, &g, 6, 5, true, 128, 1).unwrap();
        assert!(ex.size() > stop.size() && ex.size() <= 5);
        assert!(ex.deletions.is_empty());
        let none = attack_only_addition(&constant_model(), &g, 6, 5, true, 128, 1).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn deletion_infeasible_node_stays_put() {
        // class 0 from a positive bias that no deletion can remove
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)])
            .unwrap()
            .with_features(2, vec![1.0; 8])
            .unwrap();
        let m = constant_model();
        let p = greedy_gradient_deletion(&m, &g, 0, Some(5)).unwrap();
        assert!(p.is_empty());
        let spec = BaselineSpec::new(BaselineKind::GreedyGradientDeletion, 5, 0);
        assert_eq!(run_baseline(&m, &g, 0, &spec).unwrap(), p);
        assert!(run_baseline(
            &m,
            &g,
            0,
            &BaselineSpec::new(BaselineKind::RandomDeletion, 0, 0)
        )
        .is_err());
    }
}
