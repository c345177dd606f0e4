use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::candidates::Slot;
use crate::error::Result;
use crate::graph::{
    ball, clustering_in, Edge, Graph, NodeId, Perturbation, PerturbedView, Topology,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlauTerms {
    pub plau: f64,
    pub deg_anom: f64,
    pub motif_viol: f64,
}

/// Nodes the plausibility penalty is summed over: the `(depth+1)`-hop ball
/// of `v` plus every endpoint of `p`.
pub fn plausibility_scope(g: &Graph, v: NodeId, depth: usize, p: &Perturbation) -> Vec<NodeId> {
    let mut set: BTreeSet<NodeId> = ball(g, &[v], depth + 1).into_iter().collect();
    set.extend(p.endpoints());
    set.into_iter().collect()
}

/// Degree and clustering deviation of `g ⊕ p` from `g`, summed over `scope`.
pub fn loss_plau(
    g: &Graph,
    scope: &[NodeId],
    p: &Perturbation,
    alpha_deg: f64,
    alpha_motif: f64,
) -> Result<PlauTerms> {
    p.validate(g)?;
    for &i in scope {
        g.check_node(i)?;
    }
    let view = PerturbedView::new(g, p);
    // only endpoints change degree; only endpoints and their neighbours change clustering
    let mut touched: BTreeSet<NodeId> = BTreeSet::new();
    for u in p.endpoints() {
        touched.insert(u);
        touched.extend(g.neighbors(u).iter().copied());
        touched.extend(view.neighbors_of(u));
    }
    let mut deg_anom = 0.0;
    let mut motif_viol = 0.0;
    for &i in scope {
        if !touched.contains(&i) {
            continue;
        }
        let d0 = g.neighbors(i).len() as f64;
        let d1 = view.degree_of(i) as f64;
        deg_anom += (d1 - d0).abs() / (1.0 + d0);
        motif_viol += (clustering_in(&view, i) - clustering_in(g, i)).abs();
    }
    Ok(PlauTerms {
        plau: alpha_deg * deg_anom + alpha_motif * motif_viol,
        deg_anom,
        motif_viol,
    })
}

struct NodeBase {
    degree: f64,
    triangles: f64,
    clustering: f64,
}

struct SlotTriangle {
    nodes: [NodeId; 3],
    /// Slot index per edge (`None` for a fixed base edge).
    edges: [Option<usize>; 3],
    base_product: f64,
}

/// Smooth surrogate of [`loss_plau`] over continuous slot weights: degrees
/// are weighted row sums and triangle counts are sums of edge-weight
/// products.
pub struct RelaxedPlausibility {
    scope: BTreeMap<NodeId, NodeBase>,
    slots: Vec<(Edge, f64)>,
    triangles: Vec<SlotTriangle>,
    alpha_deg: f64,
    alpha_motif: f64,
}

impl RelaxedPlausibility {
    /// `slots` carry global edges; `scope` lists the nodes penalized.
    pub fn new(
        g: &Graph,
        slots: &[Slot],
        scope: &[NodeId],
        alpha_deg: f64,
        alpha_motif: f64,
    ) -> Self {
        let base = |s: &Slot| if s.addition { 0.0 } else { 1.0 };
        let slot_of: BTreeMap<Edge, usize> =
            slots.iter().enumerate().map(|(k, s)| (s.edge, k)).collect();
        let mut extra: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for s in slots.iter().filter(|s| s.addition) {
            extra.entry(s.edge.u).or_default().push(s.edge.v);
            extra.entry(s.edge.v).or_default().push(s.edge.u);
        }
        let union_has =
            |a: NodeId, b: NodeId| g.has_edge(a, b) || slot_of.contains_key(&Edge::new(a, b));
        let mut seen = BTreeSet::new();
        let mut triangles = Vec::new();
        for s in slots {
            let (a, b) = (s.edge.u, s.edge.v);
            let mut around: Vec<NodeId> = g.neighbors(a).to_vec();
            around.extend(extra.get(&a).into_iter().flatten().copied());
            for x in around {
                if x == b || !union_has(b, x) {
                    continue;
                }
                let mut tri = [a, b, x];
                tri.sort_unstable();
                if !seen.insert(tri) {
                    continue;
                }
                let pairs = [(tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2])];
                let edges = pairs.map(|(p, q)| slot_of.get(&Edge::new(p, q)).copied());
                let base_product = edges
                    .iter()
                    .map(|e| e.map_or(1.0, |k| base(&slots[k])))
                    .product();
                triangles.push(SlotTriangle {
                    nodes: tri,
                    edges,
                    base_product,
                });
            }
        }
        let scope = scope
            .iter()
            .map(|&i| {
                let d = g.neighbors(i).len();
                let t = crate::graph::triangles_in(g, i) as f64;
                (
                    i,
                    NodeBase {
                        degree: d as f64,
                        triangles: t,
                        clustering: clustering_in(g, i),
                    },
                )
            })
            .collect();
        RelaxedPlausibility {
            scope,
            slots: slots.iter().map(|s| (s.edge, base(s))).collect(),
            triangles,
            alpha_deg,
            alpha_motif,
        }
    }

    fn node_state(&self, w: &[f64]) -> BTreeMap<NodeId, (f64, f64)> {
        let mut state: BTreeMap<NodeId, (f64, f64)> = BTreeMap::new();
        for (k, &(e, b)) in self.slots.iter().enumerate() {
            for x in [e.u, e.v] {
                state.entry(x).or_default().0 += w[k] - b;
            }
        }
        for t in &self.triangles {
            let prod: f64 = t.edges.iter().map(|e| e.map_or(1.0, |k| w[k])).product();
            for x in t.nodes {
                state.entry(x).or_default().1 += prod - t.base_product;
            }
        }
        state
    }

    fn clustering(d: f64, t: f64) -> f64 {
        if d < 2.0 {
            0.0
        } else {
            2.0 * t / (d * (d - 1.0))
        }
    }

    /// Surrogate value at slot weights `w`.
    pub fn value(&self, w: &[f64]) -> PlauTerms {
        let mut deg_anom = 0.0;
        let mut motif_viol = 0.0;
        for (i, (dd, dt)) in self.node_state(w) {
            let Some(b) = self.scope.get(&i) else {
                continue;
            };
            deg_anom += dd.abs() / (1.0 + b.degree);
            motif_viol += (Self::clustering(b.degree + dd, b.triangles + dt) - b.clustering).abs();
        }
        PlauTerms {
            plau: self.alpha_deg * deg_anom + self.alpha_motif * motif_viol,
            deg_anom,
            motif_viol,
        }
    }

    /// `∂ plau / ∂ w_s` for every slot.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let state = self.node_state(w);
        let mut grad = vec![0.0; self.slots.len()];
        // per node: (∂term/∂degree, ∂term/∂triangles)
        let mut sens: BTreeMap<NodeId, (f64, f64)> = BTreeMap::new();
        for (&i, &(dd, dt)) in &state {
            let Some(b) = self.scope.get(&i) else {
                continue;
            };
            let d = b.degree + dd;
            let t = b.triangles + dt;
            let mut gd = self.alpha_deg * sign(dd) / (1.0 + b.degree);
            let mut gt = 0.0;
            if d >= 2.0 {
                let s = self.alpha_motif * sign(Self::clustering(d, t) - b.clustering);
                let denom = d * (d - 1.0);
                gt = s * 2.0 / denom;
                gd += s * (-2.0 * t * (2.0 * d - 1.0) / (denom * denom));
            }
            sens.insert(i, (gd, gt));
        }
        for (k, &(e, _)) in self.slots.iter().enumerate() {
            for x in [e.u, e.v] {
                if let Some(&(gd, _)) = sens.get(&x) {
                    grad[k] += gd;
                }
            }
        }
        for t in &self.triangles {
            let gt_sum: f64 = t
                .nodes
                .iter()
                .filter_map(|x| sens.get(x))
                .map(|s| s.1)
                .sum();
            if gt_sum == 0.0 {
                continue;
            }
            for (pos, e) in t.edges.iter().enumerate() {
                if let Some(k) = *e {
                    let others: f64 = t
                        .edges
                        .iter()
                        .enumerate()
                        .filter(|&(q, _)| q != pos)
                        .map(|(_, e)| e.map_or(1.0, |k| w[k]))
                        .product();
                    grad[k] += gt_sum * others;
                }
            }
        }
        grad
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
