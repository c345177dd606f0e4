//! Graphlet orbit counts for connected graphlets on 2 to 4 nodes.
//!
//! Orbit numbering:
//!
//! | orbit | graphlet | role |
//! |---|---|---|
//! | 0 | edge | either end |
//! | 1, 2 | 3-path | end, middle |
//! | 3 | triangle | any |
//! | 4, 5 | 4-path | end, inner |
//! | 6, 7 | 3-star | leaf, center |
//! | 8 | 4-cycle | any |
//! | 9, 10, 11 | paw | pendant, triangle degree-2, center |
//! | 12, 13 | diamond | degree 2, degree 3 |
//! | 14 | 4-clique | any |

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Graph, NodeId};

pub const NUM_ORBITS: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitProfile {
    pub node: NodeId,
    pub counts: [u64; NUM_ORBITS],
}

/// Orbit of each member of the connected induced subgraph on `nodes`
/// (2 to 4 nodes), in input order.
pub(crate) fn classify(g: &Graph, nodes: &[NodeId]) -> Vec<usize> {
    let k = nodes.len();
    let mut deg = [0usize; 4];
    let mut edges = 0;
    for a in 0..k {
        for b in a + 1..k {
            if g.has_edge(nodes[a], nodes[b]) {
                deg[a] += 1;
                deg[b] += 1;
                edges += 1;
            }
        }
    }
    let deg = &deg[..k];
    match (k, edges) {
        (2, 1) => vec![0, 0],
        (3, 2) => deg.iter().map(|&d| if d == 1 { 1 } else { 2 }).collect(),
        (3, 3) => vec![3; 3],
        (4, 3) if deg.contains(&3) => deg.iter().map(|&d| if d == 3 { 7 } else { 6 }).collect(),
        (4, 3) => deg.iter().map(|&d| if d == 1 { 4 } else { 5 }).collect(),
        (4, 4) if deg.iter().all(|&d| d == 2) => vec![8; 4],
        (4, 4) => deg.iter().map(|&d| 8 + d).collect(),
        (4, 5) => deg.iter().map(|&d| if d == 2 { 12 } else { 13 }).collect(),
        (4, 6) => vec![14; 4],
        _ => unreachable!("disconnected or oversized graphlet {nodes:?}"),
    }
}

/// Orbit counts of every node, by enumerating each connected induced
/// subgraph on at most 4 nodes exactly once (ESU).
pub fn count_orbits_all(g: &Graph) -> Vec<[u64; NUM_ORBITS]> {
    let n = g.node_count();
    let mut counts = vec![[0u64; NUM_ORBITS]; n];
    let mut sub = Vec::with_capacity(4);
    for v in 0..n {
        sub.clear();
        sub.push(v);
        let ext: Vec<NodeId> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        extend(g, &mut sub, ext, v, &mut counts);
    }
    counts
}

fn extend(
    g: &Graph,
    sub: &mut Vec<NodeId>,
    mut ext: Vec<NodeId>,
    root: NodeId,
    counts: &mut [[u64; NUM_ORBITS]],
) {
    if sub.len() >= 2 {
        for (&node, orbit) in sub.iter().zip(classify(g, sub)) {
            counts[node][orbit] += 1;
        }
    }
    if sub.len() == 4 {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            if u > root
                && !sub.contains(&u)
                && u != w
                && !next.contains(&u)
                && !sub.iter().any(|&s| g.has_edge(s, u))
            {
                next.push(u);
            }
        }
        sub.push(w);
        extend(g, sub, next, root, counts);
        sub.pop();
    }
}

/// Orbit profiles of `nodes`.
pub fn count_orbits(g: &Graph, nodes: &[NodeId]) -> Result<Vec<OrbitProfile>> {
    for &v in nodes {
        g.check_node(v)?;
    }
    let all = count_orbits_all(g);
    Ok(nodes
        .iter()
        .map(|&v| OrbitProfile {
            node: v,
            counts: all[v],
        })
        .collect())
}

/// Mean profile of nodes known to make good attack endpoints.
pub fn orbit_centroid(profiles: &[[u64; NUM_ORBITS]]) -> Option<[f64; NUM_ORBITS]> {
    if profiles.is_empty() {
        return None;
    }
    let mut c = [0.0; NUM_ORBITS];
    for p in profiles {
        for (a, &b) in c.iter_mut().zip(p) {
            *a += b as f64;
        }
    }
    c.iter_mut().for_each(|a| *a /= profiles.len() as f64);
    Some(c)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ball;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(g: &Graph) -> Vec<[u64; NUM_ORBITS]> {
        let n = g.node_count();
        let mut counts = vec![[0u64; NUM_ORBITS]; n];
        let connected = |set: &[NodeId]| {
            let sub = g.induced_subgraph(set).unwrap();
            ball(&sub, &[0], set.len()).len() == set.len()
        };
        let mut record = |set: &[NodeId]| {
            if connected(set) {
                for (&v, o) in set.iter().zip(classify(g, set)) {
                    counts[v][o] += 1;
                }
            }
        };
        for a in 0..n {
            for b in a + 1..n {
                record(&[a, b]);
                for c in b + 1..n {
                    record(&[a, b, c]);
                    for d in c + 1..n {
                        record(&[a, b, c, d]);
                    }
                }
            }
        }
        counts
    }

    #[test]
    fn star_leaf_and_triangle() {
        let star = Graph::from_edges(5, (1..5).map(|l| (0, l))).unwrap();
        let c = count_orbits_all(&star);
        assert_eq!(c[1][0], 1);
        // leaf 1 ends the 3-paths 1-0-2, 1-0-3, 1-0-4
        assert_eq!(c[1][1], 3);
        assert_eq!(c[0][2], 6);
        assert_eq!(c[0][7], 4);
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(count_orbits_all(&tri)[0][3], 1);
        assert_eq!(count_orbits_all(&tri)[0][1], 0);
    }

    #[test]
    fn matches_subset_enumeration_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, p) in [(50, 0.08), (30, 0.2), (12, 0.6)] {
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((a, b));
                    }
                }
            }
            let g = Graph::from_edges(n, edges).unwrap();
            let fast = count_orbits_all(&g);
            assert_eq!(fast, brute_force(&g));
            for v in 0..n {
                assert_eq!(fast[v][0], g.degree(v).unwrap() as u64);
            }
        }
    }

    #[test]
    fn centroid_and_cosine() {
        assert!(orbit_centroid(&[]).is_none());
        let mut a = [0u64; NUM_ORBITS];
        a[0] = 2;
        let mut b = [0u64; NUM_ORBITS];
        b[1] = 2;
        let c = orbit_centroid(&[a, b]).unwrap();
        assert_eq!(c[0], 1.0);
        assert_eq!(c[1], 1.0);
        assert!((cosine(&[1.0, 0.0], &[2.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[0.0], &[1.0]), 0.0);
    }
}
