use crate::gnn::{train, GcnModel, TrainConfig};
use crate::graph::Graph;

/// Two feature-separated triangles; node 6 leans class 0 and hangs off the
/// class-0 triangle. Linking it to node 3 is the only single edit that flips it.
pub fn toy() -> (Graph, GcnModel) {
    let g = Graph::from_edges(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (6, 0)])
        .unwrap()
        .with_features(
            2,
            vec![
                1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.5, 0.2, 0.8, 0.4, 0.6, 0.55, 0.45,
            ],
        )
        .unwrap()
        .with_labels(
            vec![0, 0, 0, 1, 1, 1, 0],
            vec![true, true, true, true, true, true, false],
            Some(2),
        )
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
