//! Greedy post-hoc pruning of a flipping edit set down to an irreducible one.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::NodeClassifier;
use crate::graph::{Edit, Graph, NodeId, Perturbation};
use crate::optimizer::OptimizeResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedResult {
    pub perturbation: Perturbation,
    pub removed_count: usize,
    /// Edits of the input by decreasing importance, with their scores.
    pub importance_ranking: Vec<(Edit, f64)>,
    pub edges_tested: usize,
    pub forward_passes: usize,
}

/// `ψ_e = |∂L/∂M_e|` at the last optimizer epoch, most important first.
/// Ties go to the larger `|M_e|`, then to the smaller edit.
pub fn importance_scores(res: &OptimizeResult, p: &Perturbation) -> Result<Vec<(Edit, f64)>> {
    if res.final_gradient.len() != res.slot_edges.len()
        || res.final_mask.len() != res.slot_edges.len()
    {
        return Err(Error::contract(
            "optimizer result carries no final gradient record",
        ));
    }
    let mut scored = Vec::with_capacity(p.size());
    for edit in p.edits() {
        let e = edit.edge();
        let k = res
            .slot_edges
            .iter()
            .position(|s| *s == e)
            .ok_or_else(|| Error::contract(format!("edit {edit} has no optimizer slot")))?;
        scored.push((edit, res.final_gradient[k].abs(), res.final_mask[k].abs()));
    }
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(b.2.partial_cmp(&a.2).unwrap_or(Ordering::Equal))
            .then(a.0.cmp(&b.0))
    });
    Ok(scored.into_iter().map(|(e, psi, _)| (e, psi)).collect())
}

/// Drops edits least-important first while the rest still flips `v`, and
/// repeats the sweep until nothing more can go. A non-flipping input comes
/// back unchanged.
pub fn prune_minimal<C: NodeClassifier + ?Sized>(
    model: &C,
    g: &Graph,
    v: NodeId,
    p: &Perturbation,
    ranking: &[(Edit, f64)],
) -> Result<PrunedResult> {
    let original = model.predict(g, v)?;
    let mut forward_passes = 2;
    let mut out = PrunedResult {
        perturbation: p.clone(),
        removed_count: 0,
        importance_ranking: ranking.to_vec(),
        edges_tested: 0,
        forward_passes,
    };
    if model.predict_perturbed(g, p, v)? == original {
        return Ok(out);
    }
    let mut order: Vec<Edit> = ranking
        .iter()
        .rev()
        .map(|(e, _)| *e)
        .filter(|e| p.contains(e))
        .collect();
    // edits the ranking does not mention go first, in canonical order
    let unranked: Vec<Edit> = p
        .edits()
        .into_iter()
        .filter(|e| !order.contains(e))
        .collect();
    order.splice(0..0, unranked);

    let mut current = p.clone();
    loop {
        let mut changed = false;
        for edit in &order {
            if !current.contains(edit) {
                continue;
            }
            let trial = current.without(edit);
            out.edges_tested += 1;
            forward_passes += 1;
            if model.predict_perturbed(g, &trial, v)? != original {
                current = trial;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    out.removed_count = p.size() - current.size();
    out.perturbation = current;
    out.forward_passes = forward_passes;
    Ok(out)
}

/// True when removing any single edit of `p` restores the original class.
pub fn is_irreducible<C: NodeClassifier + ?Sized>(
    model: &C,
    g: &Graph,
    v: NodeId,
    p: &Perturbation,
) -> Result<bool> {
    let original = model.predict(g, v)?;
    for edit in p.edits() {
        if model.predict_perturbed(g, &p.without(&edit), v)? != original {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::testutil::toy;

    /// Classifies by how many added edges touch `v`; flips once two are in.
    struct CountAdds;

    impl NodeClassifier for CountAdds {
        fn predict(&self, _: &Graph, _: NodeId) -> Result<usize> {
            Ok(0)
        }

        fn predict_perturbed(&self, _: &Graph, p: &Perturbation, v: NodeId) -> Result<usize> {
            Ok(usize::from(
                p.additions.iter().filter(|e| e.touches(v)).count() >= 2,
            ))
        }
    }

    fn result_with(edges: &[(Edge, f64, f64)]) -> OptimizeResult {
        OptimizeResult {
            target: 0,
            original_class: 0,
            perturbation: Perturbation::new(),
            flipped: false,
            history: Vec::new(),
            epochs_used: 1,
            chosen_epoch: Some(0),
            last_perturbation: Perturbation::new(),
            slot_edges: edges.iter().map(|e| e.0).collect(),
            final_mask: edges.iter().map(|e| e.2).collect(),
            final_gradient: edges.iter().map(|e| e.1).collect(),
            diagnostics: Vec::new(),
        }
    }

    #[test]
    fn ranking_examples() {
        let a = Edge::new(0, 1);
        let b = Edge::new(0, 2);
        let r = result_with(&[(a, 0.1, 0.6), (b, -0.3, 0.6)]);
        let p = Perturbation::from_edits([Edit::Add(a), Edit::Add(b)]);
        let rank = importance_scores(&r, &p).unwrap();
        assert_eq!(rank, vec![(Edit::Add(b), 0.3), (Edit::Add(a), 0.1)]);

        let r = result_with(&[(a, 0.2, 0.6), (b, 0.2, -0.9)]);
        let p = Perturbation::from_edits([Edit::Add(a), Edit::Delete(b)]);
        assert_eq!(importance_scores(&r, &p).unwrap()[0].0, Edit::Delete(b));

        let r = result_with(&[(a, 0.0, 0.6)]);
        let single = Perturbation::from_edits([Edit::Add(a)]);
        assert_eq!(importance_scores(&r, &single).unwrap().len(), 1);

        let mut broken = r.clone();
        broken.final_gradient.clear();
        assert!(matches!(
            importance_scores(&broken, &single),
            Err(Error::Contract(_))
        ));
        assert!(importance_scores(&r, &p).is_err());
    }

    #[test]
    fn irrelevant_deletion_is_dropped() {
        let (g, m) = toy();
        let essential = Edit::Add(Edge::new(3, 6));
        let class = m.predict(&g, 6).unwrap();
        let flips = |p: &Perturbation| m.predict_perturbed(&g, p, 6).unwrap() != class;
        // a deletion that neither flips alone nor spoils the essential edit
        let irrelevant = g
            .edges()
            .map(Edit::Delete)
            .find(|&d| {
                !flips(&Perturbation::from_edits([d]))
                    && flips(&Perturbation::from_edits([essential, d]))
            })
            .expect("toy has an irrelevant deletion");
        let p = Perturbation::from_edits([essential, irrelevant]);
        let rank = vec![(irrelevant, 0.9), (essential, 0.1)];
        let out = prune_minimal(&m, &g, 6, &p, &rank).unwrap();
        assert_eq!(out.perturbation, Perturbation::from_edits([essential]));
        assert_eq!(out.removed_count, 1);
        assert!(is_irreducible(&m, &g, 6, &out.perturbation).unwrap());
        let again = prune_minimal(&m, &g, 6, &out.perturbation, &rank).unwrap();
        assert_eq!(again.perturbation, out.perturbation);
        assert_eq!(again.removed_count, 0);
    }

    #[test]
    fn non_flipping_input_is_untouched() {
        let (g, m) = toy();
        let p = Perturbation::from_edits([Edit::Delete(Edge::new(1, 2))]);
        let out = prune_minimal(&m, &g, 6, &p, &[]).unwrap();
        assert_eq!(out.perturbation, p);
        assert_eq!(out.removed_count, 0);
        assert_eq!(out.edges_tested, 0);
    }

    #[test]
    fn visits_least_important_first() {
        let g = Graph::from_edges(5, [(0, 1)]).unwrap();
        let e: Vec<Edit> = (1..5).map(|u| Edit::Add(Edge::new(0, u))).collect();
        let p = Perturbation::from_edits(e.clone());
        let rank: Vec<(Edit, f64)> = e
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, 4.0 - i as f64))
            .collect();
        let out = prune_minimal(&CountAdds, &g, 0, &p, &rank).unwrap();
        assert_eq!(out.perturbation, Perturbation::from_edits([e[0], e[1]]));
        assert_eq!(out.removed_count, 2);
        assert!(is_irreducible(&CountAdds, &g, 0, &out.perturbation).unwrap());
    }

    /// Flips exactly on the listed edit sets.
    struct Table(Vec<Perturbation>);

    impl NodeClassifier for Table {
        fn predict(&self, _: &Graph, _: NodeId) -> Result<usize> {
            Ok(0)
        }

        fn predict_perturbed(&self, _: &Graph, p: &Perturbation, _: NodeId) -> Result<usize> {
            Ok(usize::from(self.0.contains(p)))
        }
    }

    #[test]
    fn repeated_sweeps_reach_irreducibility() {
        let g = Graph::from_edges(4, [(1, 2)]).unwrap();
        let [x, y, z] = [1, 2, 3].map(|u| Edit::Add(Edge::new(0, u)));
        let set = |e: &[Edit]| Perturbation::from_edits(e.iter().copied());
        // one sweep x, y, z ends at {x, z}, which still drops x
        let model = Table(vec![set(&[x, y, z]), set(&[x, z]), set(&[z])]);
        let rank = vec![(z, 3.0), (y, 2.0), (x, 1.0)];
        let out = prune_minimal(&model, &g, 0, &set(&[x, y, z]), &rank).unwrap();
        assert_eq!(out.perturbation, set(&[z]));
        assert!(is_irreducible(&model, &g, 0, &out.perturbation).unwrap());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::graph::Edge;
    use proptest::prelude::*;

    /// Flips `v` when the edit set contains one of the listed patterns.
    struct Patterns(Vec<Vec<Edit>>);

    impl NodeClassifier for Patterns {
        fn predict(&self, _: &Graph, _: NodeId) -> Result<usize> {
            Ok(0)
        }

        fn predict_perturbed(&self, _: &Graph, p: &Perturbation, _: NodeId) -> Result<usize> {
            Ok(usize::from(
                self.0.iter().any(|pat| pat.iter().all(|e| p.contains(e))),
            ))
        }
    }

    fn edit(k: usize) -> Edit {
        Edit::Add(Edge::new(0, k + 1))
    }

    proptest! {
        #[test]
        fn output_is_an_irreducible_flipping_subset(
            members in proptest::collection::btree_set(0usize..10, 1..10),
            patterns in proptest::collection::vec(proptest::collection::btree_set(0usize..10, 1..4), 1..4),
            scores in proptest::collection::vec(0.0f64..1.0, 10),
        ) {
            let g = Graph::from_edges(12, std::iter::empty::<(usize, usize)>()).unwrap();
            let model = Patterns(patterns.iter().map(|p| p.iter().map(|&k| edit(k)).collect()).collect());
            let p = Perturbation::from_edits(members.iter().map(|&k| edit(k)));
            let mut ranking: Vec<(Edit, f64)> = members.iter().map(|&k| (edit(k), scores[k])).collect();
            ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
            let out = prune_minimal(&model, &g, 0, &p, &ranking).unwrap();
            let q = &out.perturbation;
            prop_assert!(q.edits().iter().all(|e| p.contains(e)));
            prop_assert_eq!(out.removed_count, p.size() - q.size());
            let flips = model.predict_perturbed(&g, &p, 0).unwrap() == 1;
            if flips {
                prop_assert_eq!(model.predict_perturbed(&g, q, 0).unwrap(), 1);
                prop_assert!(is_irreducible(&model, &g, 0, q).unwrap());
                let again = prune_minimal(&model, &g, 0, q, &ranking).unwrap();
                prop_assert_eq!(&again.perturbation, q);
            } else {
                prop_assert_eq!(q, &p);
            }
        }
    }
}
