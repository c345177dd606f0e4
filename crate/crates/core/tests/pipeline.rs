use hybridcf::datasets::{gen_ba_shapes, random_split};
use hybridcf::explain::{select_targets, ExplainConfig, Explainer, Method, TargetSelection};
use hybridcf::gnn::{train, GcnModel, NodeClassifier, TrainConfig};
use hybridcf::metrics::EvaluationReport;
use hybridcf::pruner::is_irreducible;
use hybridcf::report::{read_records, write_records};

fn setup() -> (hybridcf::Graph, GcnModel) {
    let g = random_split(gen_ba_shapes(60, 3, 8, 7).unwrap(), 0.8, 7).unwrap();
    let mut m = GcnModel::for_graph(&g, &[12], 7).unwrap();
    let tc = TrainConfig {
        epochs: 300,
        seed: 7,
        ..TrainConfig::default()
    };
    train(&mut m, &g, &tc).unwrap();
    (g, m)
}

#[test]
fn every_method_produces_checked_records() {
    let (g, m) = setup();
    let targets = select_targets(&m, &g, &TargetSelection::Sampled { n: 8, seed: 3 }).unwrap();
    assert_eq!(targets.len(), 8);
    for method in Method::ALL {
        let cfg = ExplainConfig {
            method,
            ..ExplainConfig::default()
        };
        let ex = Explainer::new(&m, &g, cfg).unwrap();
        let runs = ex.explain_all(&targets, 2).unwrap();
        let (records, times): (Vec<_>, Vec<f64>) = runs.into_iter().unzip();
        for r in &records {
            let p = r.perturbation();
            p.validate(&g).unwrap();
            let flipped = m.predict_perturbed(&g, &p, r.target).unwrap() != r.original_class;
            if r.success {
                assert!(flipped, "{method} target {}", r.target);
                assert!(p.size() <= 5);
            }
            if method == Method::Hybrid && r.success {
                assert!(is_irreducible(&m, &g, r.target, &p).unwrap());
            }
        }
        let report = EvaluationReport::from_records(&records, &times).unwrap();
        let wins = records.iter().filter(|r| r.success).count();
        assert_eq!(report.misclassification_rate, wins as f64 / 8.0);
    }
}

#[test]
fn records_survive_a_round_trip() {
    let (g, m) = setup();
    let ex = Explainer::new(&m, &g, ExplainConfig::default()).unwrap();
    let targets = select_targets(&m, &g, &TargetSelection::Sampled { n: 3, seed: 1 }).unwrap();
    let records: Vec<_> = ex.explain_all(&targets, 1).unwrap().into_iter().map(|r| r.0).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    write_records(&path, &records).unwrap();
    assert_eq!(read_records(&path).unwrap(), records);
}
