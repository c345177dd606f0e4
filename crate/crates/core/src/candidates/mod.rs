//! The restricted edit space around a target: local deletions plus
//! additions incident to the target, chosen by margin gradient and by
//! graphlet-orbit role.

mod orbits;

pub use orbits::{
    cosine, count_orbits, count_orbits_all, orbit_centroid, OrbitProfile, NUM_ORBITS,
};

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{argmax, grad_wrt_adjacency, GcnModel, LocalGraph};
use crate::graph::{ball, Edge, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    LocalDeletion,
    GradientAddition,
    OrbitAddition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub edge: Edge,
    pub provenance: Provenance,
    /// Margin gradient for gradient-ranked edits, orbit score for orbit picks.
    pub score: f64,
}

impl Candidate {
    pub fn is_addition(&self) -> bool {
        self.provenance != Provenance::LocalDeletion
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateConfig {
    /// Total addition candidates `k`.
    pub additions: usize,
    /// How many of the `k` slots go to orbit-ranked endpoints.
    pub orbit_additions: usize,
    /// Far nodes sampled into the gradient pool.
    pub far_pool: usize,
    pub seed: u64,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        CandidateConfig {
            additions: 8,
            orbit_additions: 2,
            far_pool: 128,
            seed: 102,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub target: NodeId,
    pub deletions: Vec<Candidate>,
    pub additions: Vec<Candidate>,
    /// Nodes of the local view the optimizer works on.
    pub local_nodes: Vec<NodeId>,
    /// Fewer legal gradient additions than requested.
    pub truncated: bool,
    pub diagnostics: Vec<String>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.deletions.len() + self.additions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Deletions first, then additions; this is the slot order everywhere.
    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.deletions.iter().chain(self.additions.iter())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Per-graph data shared by all targets.
#[derive(Debug, Clone)]
pub struct SelectorContext {
    pub predicted: Vec<usize>,
    pub orbits: Vec<[u64; NUM_ORBITS]>,
    pub centroid: Option<[f64; NUM_ORBITS]>,
}

impl SelectorContext {
    pub fn new(model: &GcnModel, g: &Graph) -> Result<Self> {
        Ok(SelectorContext {
            predicted: model
                .predict_all(g)?
                .into_iter()
                .map(|p| p.predicted_class)
                .collect(),
            orbits: count_orbits_all(g),
            centroid: None,
        })
    }

    /// Switches the orbit selector to similarity against the mean profile of
    /// `endpoints` (nodes whose additions flipped earlier targets).
    pub fn calibrate(&mut self, endpoints: &[NodeId]) {
        let profiles: Vec<_> = endpoints.iter().map(|&u| self.orbits[u]).collect();
        self.centroid = orbit_centroid(&profiles);
    }
}

/// Existing edges inside the `(depth+1)`-hop ball of `v`.
pub fn deletion_candidates(g: &Graph, depth: usize, v: NodeId) -> Result<Vec<Edge>> {
    Ok(g.khop_neighborhood(v, depth + 1)?.1)
}

/// Nodes whose features and degrees can reach `v`'s prediction once edges
/// `(v, u)` for `u` in `endpoints` are added: `B(v, depth+1) ∪ B(endpoints, depth)`.
pub fn local_view_nodes(g: &Graph, v: NodeId, depth: usize, endpoints: &[NodeId]) -> Vec<NodeId> {
    let mut set: BTreeSet<NodeId> = ball(g, &[v], depth + 1).into_iter().collect();
    if !endpoints.is_empty() {
        set.extend(ball(g, endpoints, depth));
    }
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientAdditions {
    /// `(edge, g_e)`, every `g_e < 0`, most negative first.
    pub ranked: Vec<(Edge, f64)>,
    pub truncated: bool,
}

fn far_sample(g: &Graph, v: NodeId, near: &[NodeId], count: usize, seed: u64) -> Vec<NodeId> {
    let far: Vec<NodeId> = (0..g.node_count())
        .filter(|u| near.binary_search(u).is_err())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (v as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut picked: Vec<NodeId> = far
        .choose_multiple(&mut rng, count.min(far.len()))
        .copied()
        .collect();
    picked.sort_unstable();
    picked
}

/// Margin gradients of the absent pairs `(v, u)` over the gradient pool and
/// of the local deletion edges, from one backward pass. The margin is taken
/// for `class`, or for the current prediction when `None`.
pub fn margin_gradients(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    class: Option<usize>,
    far_pool: usize,
    seed: u64,
) -> Result<(Vec<(Edge, f64)>, Vec<(Edge, f64)>)> {
    g.check_node(v)?;
    let depth = model.num_layers();
    let near = ball(g, &[v], depth + 2);
    let mut pool: Vec<NodeId> = near
        .iter()
        .copied()
        .filter(|&u| u != v && !g.has_edge(u, v))
        .collect();
    pool.extend(far_sample(g, v, &near, far_pool, seed));
    pool.sort_unstable();
    let local = LocalGraph::induced(g, g, local_view_nodes(g, v, depth, &pool));
    let trace = local.forward(model)?;
    let row = local.index_of(v).expect("target in its own view");
    let class = class.unwrap_or_else(|| argmax(trace.logits.row(row).as_slice().unwrap()));
    if model.class_count() < 2 {
        return Ok((Vec::new(), Vec::new()));
    }
    let back = grad_wrt_adjacency(model, &trace, row, class)?;
    let grad = trace.adjacency_gradient(model, &back)?;
    let additions = pool
        .iter()
        .map(|&u| (Edge::new(v, u), grad.edge(row, local.index_of(u).unwrap())))
        .collect();
    let deletions = deletion_candidates(g, depth, v)?
        .into_iter()
        .map(|e| {
            let (i, j) = (local.index_of(e.u).unwrap(), local.index_of(e.v).unwrap());
            (e, grad.edge(i, j))
        })
        .collect();
    Ok((additions, deletions))
}

pub(crate) fn rank_negative(mut scored: Vec<(Edge, f64)>, k: usize) -> GradientAdditions {
    scored.retain(|&(_, s)| s < 0.0);
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let truncated = scored.len() < k;
    scored.truncate(k);
    GradientAdditions {
        ranked: scored,
        truncated,
    }
}

/// The `k` absent edges `(v, u)` whose addition lowers `v`'s margin the most
/// to first order. Pool: the `(depth+2)`-hop ball plus `far_pool` sampled
/// far nodes.
pub fn addition_candidates_gradient(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    k: usize,
    far_pool: usize,
    seed: u64,
) -> Result<GradientAdditions> {
    g.check_node(v)?;
    if k == 0 {
        return Ok(GradientAdditions {
            ranked: Vec::new(),
            truncated: false,
        });
    }
    let (adds, _) = margin_gradients(model, g, v, None, far_pool, seed)?;
    Ok(rank_negative(adds, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitAdditions {
    /// `(edge, score)`, best first.
    pub ranked: Vec<(Edge, f64)>,
    pub diagnostic: Option<String>,
}

/// Up to `k` absent edges `(v, u)` with `u` predicted differently from `v`,
/// ranked by orbit score: cosine to `centroid` when calibrated, otherwise the
/// node's 3-path-end plus triangle counts. Ties go to the smaller id.
pub fn addition_candidates_orbit(
    g: &Graph,
    v: NodeId,
    k: usize,
    predicted: &[usize],
    orbits: &[[u64; NUM_ORBITS]],
    centroid: Option<&[f64; NUM_ORBITS]>,
) -> Result<OrbitAdditions> {
    g.check_node(v)?;
    if predicted.len() != g.node_count() || orbits.len() != g.node_count() {
        return Err(Error::contract("per-node tables do not match the graph"));
    }
    let mut scored: Vec<(Edge, f64)> = (0..g.node_count())
        .filter(|&u| u != v && predicted[u] != predicted[v] && !g.has_edge(u, v))
        .map(|u| {
            let o = &orbits[u];
            let s = match centroid {
                Some(c) => cosine(&o.map(|x| x as f64), c),
                None => (o[1] + o[3]) as f64,
            };
            (Edge::new(v, u), s)
        })
        .collect();
    let diagnostic = scored.is_empty().then(|| {
        format!(
            "no node outside class {} available for node {v}",
            predicted[v]
        )
    });
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.other(v).cmp(&b.0.other(v))));
    scored.truncate(k);
    Ok(OrbitAdditions {
        ranked: scored,
        diagnostic,
    })
}

/// Builds `S = S⁻ ∪ S⁺` for `v`.
pub fn build_candidates(
    model: &GcnModel,
    g: &Graph,
    v: NodeId,
    cfg: &CandidateConfig,
    ctx: &SelectorContext,
) -> Result<CandidateSet> {
    g.check_node(v)?;
    let depth = model.num_layers();
    let (adds, dels) = margin_gradients(model, g, v, None, cfg.far_pool, cfg.seed)?;
    let mut diagnostics = Vec::new();
    let grad = rank_negative(adds, cfg.additions);
    let orbit = addition_candidates_orbit(
        g,
        v,
        cfg.additions,
        &ctx.predicted,
        &ctx.orbits,
        ctx.centroid.as_ref(),
    )?;
    if let Some(d) = &orbit.diagnostic {
        diagnostics.push(d.clone());
    }
    let orbit_quota = cfg
        .orbit_additions
        .min(cfg.additions)
        .min(orbit.ranked.len());
    let mut chosen: Vec<Candidate> = Vec::new();
    let mut taken = BTreeSet::new();
    for &(e, s) in grad.ranked.iter().take(cfg.additions - orbit_quota) {
        taken.insert(e);
        chosen.push(Candidate {
            edge: e,
            provenance: Provenance::GradientAddition,
            score: s,
        });
    }
    for &(e, s) in &orbit.ranked {
        if chosen.len() >= cfg.additions {
            break;
        }
        if taken.insert(e) {
            chosen.push(Candidate {
                edge: e,
                provenance: Provenance::OrbitAddition,
                score: s,
            });
        }
    }
    for &(e, s) in &grad.ranked {
        if chosen.len() >= cfg.additions {
            break;
        }
        if taken.insert(e) {
            chosen.push(Candidate {
                edge: e,
                provenance: Provenance::GradientAddition,
                score: s,
            });
        }
    }
    let endpoints: Vec<NodeId> = chosen.iter().map(|c| c.edge.other(v)).collect();
    let deletions = dels
        .into_iter()
        .map(|(e, s)| Candidate {
            edge: e,
            provenance: Provenance::LocalDeletion,
            score: s,
        })
        .collect();
    Ok(CandidateSet {
        target: v,
        deletions,
        additions: chosen,
        local_nodes: local_view_nodes(g, v, depth, &endpoints),
        truncated: grad.truncated,
        diagnostics,
    })
}

/// One optimizable entry of the local adjacency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub edge: Edge,
    /// Local ids, `i < j`.
    pub i: usize,
    pub j: usize,
    pub addition: bool,
}

/// The local view of a candidate set: base edges of the induced subgraph
/// plus one slot per candidate.
#[derive(Debug, Clone)]
pub struct LocalProblem {
    pub target: NodeId,
    pub target_local: usize,
    pub local: LocalGraph,
    pub slots: Vec<Slot>,
    slot_of: HashMap<Edge, usize>,
    /// For each local base edge, the deletion slot covering it.
    base_slot: Vec<Option<usize>>,
}

/// Maps a candidate set onto its local view.
pub fn build_local_adjacency(g: &Graph, cands: &CandidateSet) -> Result<LocalProblem> {
    let v = cands.target;
    g.check_node(v)?;
    let local = LocalGraph::induced(g, g, cands.local_nodes.clone());
    let target_local = local
        .index_of(v)
        .ok_or_else(|| Error::contract("target missing from local nodes"))?;
    let mut slots = Vec::with_capacity(cands.len());
    let mut slot_of = HashMap::new();
    for c in cands.iter() {
        let e = c.edge;
        let (Some(a), Some(b)) = (local.index_of(e.u), local.index_of(e.v)) else {
            return Err(Error::contract(format!(
                "candidate {e} leaves the local view"
            )));
        };
        if g.has_edge(e.u, e.v) == c.is_addition() {
            return Err(Error::contract(format!(
                "candidate {e} has the wrong direction"
            )));
        }
        if c.is_addition() && !e.touches(v) {
            return Err(Error::contract(format!(
                "addition {e} is not incident to {v}"
            )));
        }
        if slot_of.insert(e, slots.len()).is_some() {
            return Err(Error::contract(format!("candidate {e} listed twice")));
        }
        slots.push(Slot {
            edge: e,
            i: a.min(b),
            j: a.max(b),
            addition: c.is_addition(),
        });
    }
    let base_slot = local
        .edges()
        .iter()
        .map(|&(i, j)| {
            slot_of
                .get(&Edge::new(local.nodes()[i], local.nodes()[j]))
                .copied()
        })
        .collect();
    Ok(LocalProblem {
        target: v,
        target_local,
        local,
        slots,
        slot_of,
        base_slot,
    })
}

impl LocalProblem {
    pub fn slot_of(&self, e: &Edge) -> Option<usize> {
        self.slot_of.get(e).copied()
    }

    /// Weighted local edges where slot `s` takes adjacency value `values[s]`
    /// and every other base edge weight 1.
    pub fn weighted_edges(&self, values: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<(usize, usize, f64)> = self
            .local
            .edges()
            .iter()
            .zip(&self.base_slot)
            .map(|(&(i, j), s)| (i, j, s.map_or(1.0, |s| values[s])))
            .collect();
        for (s, slot) in self.slots.iter().enumerate() {
            if slot.addition {
                out.push((slot.i, slot.j, values[s]));
            }
        }
        out
    }

    /// Adjacency values of the unperturbed graph: 1 on deletion slots, 0 on
    /// addition slots.
    pub fn base_values(&self) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| if s.addition { 0.0 } else { 1.0 })
            .collect()
    }

    /// The relaxed adjacency matrix `A_v` at slot values `values`.
    pub fn dense(&self, values: &[f64]) -> Array2<f64> {
        let n = self.local.len();
        let mut a = Array2::zeros((n, n));
        for (i, j, w) in self.weighted_edges(values) {
            a[[i, j]] = w;
            a[[j, i]] = w;
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::gen_ba_shapes;
    use crate::gnn::{predict_perturbed, train, TrainConfig};
    use crate::graph::{Edit, Perturbation};

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    #[test]
    fn deletion_candidates_examples() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(deletion_candidates(&g, 1, 2).unwrap().is_empty());
        assert_eq!(deletion_candidates(&star(4), 1, 0).unwrap().len(), 4);
    }

    #[test]
    fn deletion_candidates_match_bfs_on_ba_shapes() {
        let g = gen_ba_shapes(100, 3, 10, 1).unwrap();
        let v = 102;
        // independent BFS by repeated relaxation
        let mut dist = vec![usize::MAX; g.node_count()];
        dist[v] = 0;
        for _ in 0..3 {
            for e in g.edges().collect::<Vec<_>>() {
                let (a, b) = (dist[e.u], dist[e.v]);
                if a != usize::MAX && b > a + 1 {
                    dist[e.v] = a + 1;
                }
                if b != usize::MAX && a > b + 1 {
                    dist[e.u] = b + 1;
                }
            }
        }
        let want: Vec<Edge> = g
            .edges()
            .filter(|e| dist[e.u] <= 3 && dist[e.v] <= 3)
            .collect();
        assert_eq!(deletion_candidates(&g, 2, v).unwrap(), want);
    }

    fn toy() -> (Graph, GcnModel) {
        // two loosely coupled groups with different features
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (2, 3)])
            .unwrap()
            .with_features(
                2,
                vec![1.0, 0.0, 1.0, 0.1, 0.9, 0.0, 0.0, 1.0, 0.0, 2.0, 0.4, 0.5],
            )
            .unwrap()
            .with_labels(vec![0, 0, 0, 1, 1, 1], vec![true; 6], Some(2))
            .unwrap();
        let mut m = GcnModel::for_graph(&g, &[4], 3).unwrap();
        train(
            &mut m,
            &g,
            &TrainConfig {
                epochs: 300,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        (g, m)
    }

    #[test]
    fn top_gradient_addition_is_best_single_addition() {
        let (g, m) = toy();
        for v in 0..6 {
            let c = m.predict_node(&g, v).unwrap().predicted_class;
            let base = m.predict_node(&g, v).unwrap().margin_for(c);
            let ranked = addition_candidates_gradient(&m, &g, v, 1, 0, 0).unwrap();
            // exhaustive single-addition margins
            let mut best: Option<(Edge, f64)> = None;
            for u in 0..6 {
                if u == v || g.has_edge(u, v) {
                    continue;
                }
                let e = Edge::new(u, v);
                let p = Perturbation::from_edits([Edit::Add(e)]);
                let mg = predict_perturbed(&m, &g, &p, v).unwrap().margin_for(c);
                if best.map_or(true, |(_, b)| mg < b) {
                    best = Some((e, mg));
                }
            }
            if let (Some((e, mg)), Some(&(top, _))) = (best, ranked.ranked.first()) {
                if mg < base {
                    assert_eq!(top, e, "target {v}");
                }
            }
        }
    }

    #[test]
    fn gradient_additions_are_negative_and_flag_truncation() {
        let (g, m) = toy();
        let r = addition_candidates_gradient(&m, &g, 0, 50, 0, 0).unwrap();
        assert!(r.truncated);
        assert!(r
            .ranked
            .iter()
            .all(|&(e, s)| s < 0.0 && e.touches(0) && !g.has_edge(e.u, e.v)));
        assert!(addition_candidates_gradient(&m, &g, 0, 0, 0, 0)
            .unwrap()
            .ranked
            .is_empty());
    }

    #[test]
    fn gradient_additions_empty_when_nothing_reachable() {
        // zero first-layer weights: every projected row is zero, so every pair gradient is 0
        let g = Graph::from_edges(4, [(0, 1)])
            .unwrap()
            .with_labels(vec![0, 1, 0, 1], vec![true; 4], Some(2))
            .unwrap();
        let mut m = GcnModel::for_graph(&g, &[3], 0).unwrap();
        m.weights_mut()[0].fill(0.0);
        let r = addition_candidates_gradient(&m, &g, 0, 2, 0, 0).unwrap();
        assert!(r.ranked.is_empty());
        assert!(r.truncated);
    }

    #[test]
    fn orbit_selector_rules() {
        let g = Graph::from_edges(5, [(0, 1), (2, 3)]).unwrap();
        let orbits = count_orbits_all(&g);
        let pred = vec![0, 0, 0, 1, 0];
        let r = addition_candidates_orbit(&g, 0, 1, &pred, &orbits, None).unwrap();
        assert_eq!(
            r.ranked.iter().map(|x| x.0).collect::<Vec<_>>(),
            vec![Edge::new(0, 3)]
        );
        // two structurally identical opposite-class nodes: smaller id first
        let pred = vec![0, 0, 1, 1, 0];
        let r = addition_candidates_orbit(&g, 0, 2, &pred, &orbits, None).unwrap();
        assert_eq!(r.ranked[0].0, Edge::new(0, 2));
        assert_eq!(r.ranked[1].0, Edge::new(0, 3));
        let r = addition_candidates_orbit(&g, 0, 2, &[0; 5], &orbits, None).unwrap();
        assert!(r.ranked.is_empty() && r.diagnostic.is_some());
    }

    #[test]
    fn orbit_picks_differ_in_class_on_ba_shapes() {
        let g = gen_ba_shapes(60, 3, 6, 2).unwrap();
        let labels = g.labels().to_vec();
        let orbits = count_orbits_all(&g);
        let r = addition_candidates_orbit(&g, 5, 4, &labels, &orbits, None).unwrap();
        assert_eq!(r.ranked.len(), 4);
        for (e, _) in r.ranked {
            assert_ne!(labels[e.other(5)], 0);
        }
    }

    #[test]
    fn candidate_set_invariants_and_round_trip() {
        let g = gen_ba_shapes(60, 3, 6, 2).unwrap();
        let m = GcnModel::for_graph(&g, &[8], 1).unwrap();
        let ctx = SelectorContext::new(&m, &g).unwrap();
        let cfg = CandidateConfig::default();
        let cs = build_candidates(&m, &g, 63, &cfg, &ctx).unwrap();
        let dels = deletion_candidates(&g, 2, 63).unwrap();
        assert!(cs.deletions.iter().all(|c| dels.contains(&c.edge)));
        assert!(cs.additions.len() <= cfg.additions);
        for c in &cs.additions {
            assert!(c.edge.touches(63) && !g.has_edge(c.edge.u, c.edge.v));
            if c.provenance == Provenance::GradientAddition {
                assert!(c.score < 0.0);
            }
        }
        let back = CandidateSet::from_json(&cs.to_json().unwrap()).unwrap();
        assert_eq!(back, cs);
        assert_eq!(build_candidates(&m, &g, 63, &cfg, &ctx).unwrap(), cs);

        let lp = build_local_adjacency(&g, &cs).unwrap();
        // every global candidate maps to exactly one symmetric local pair
        let a = lp.dense(&lp.base_values());
        for (s, c) in cs.iter().enumerate() {
            assert_eq!(lp.slot_of(&c.edge), Some(s));
            let slot = lp.slots[s];
            assert_eq!(
                Edge::new(lp.local.nodes()[slot.i], lp.local.nodes()[slot.j]),
                c.edge
            );
            assert_eq!(a[[slot.i, slot.j]], a[[slot.j, slot.i]]);
            assert_eq!(a[[slot.i, slot.j]], if c.is_addition() { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn no_additions_means_induced_adjacency() {
        let g = gen_ba_shapes(40, 2, 3, 3).unwrap();
        let v = 41;
        let cs = CandidateSet {
            target: v,
            deletions: Vec::new(),
            additions: Vec::new(),
            local_nodes: local_view_nodes(&g, v, 2, &[]),
            truncated: false,
            diagnostics: Vec::new(),
        };
        let lp = build_local_adjacency(&g, &cs).unwrap();
        let sub = g.induced_subgraph(&cs.local_nodes).unwrap();
        let a = lp.dense(&[]);
        for i in 0..sub.node_count() {
            for j in 0..sub.node_count() {
                assert_eq!(a[[i, j]], f64::from(u8::from(sub.has_edge(i, j))));
            }
        }
    }

    #[test]
    fn far_endpoint_is_appended_to_the_view() {
        let g = Graph::from_edges(8, [(0, 1), (1, 2), (5, 6), (6, 7)]).unwrap();
        let cs = CandidateSet {
            target: 0,
            deletions: Vec::new(),
            additions: vec![Candidate {
                edge: Edge::new(0, 6),
                provenance: Provenance::GradientAddition,
                score: -1.0,
            }],
            local_nodes: local_view_nodes(&g, 0, 1, &[6]),
            truncated: false,
            diagnostics: Vec::new(),
        };
        assert_eq!(cs.local_nodes, vec![0, 1, 2, 5, 6, 7]);
        let lp = build_local_adjacency(&g, &cs).unwrap();
        assert_eq!(lp.slots.len(), 1);
        let mut bad = cs.clone();
        bad.local_nodes = vec![0, 1, 2];
        assert!(matches!(
            build_local_adjacency(&g, &bad),
            Err(Error::Contract(_))
        ));
    }
}
