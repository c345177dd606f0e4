//! Dataset preparation, training and multi-seed explanation runs.

use std::fs;
use std::path::Path;

use serde::Serialize;

use hybridcf::datasets::{gen_ba_shapes, gen_loan_decision, gen_tree_cycles, random_split};
use hybridcf::explain::{select_targets, ExplainConfig, Explainer, Method, TargetRecord};
use hybridcf::gnn::{load_model, save_model, train, GcnModel, TrainConfig, TrainReport};
use hybridcf::io::load_graph_dir;
use hybridcf::metrics::EvaluationReport;
use hybridcf::report::{
    aggregate, write_records, write_summary_csv, write_timings, SummaryRow, Timing,
};
use hybridcf::Graph;

use crate::config::{DatasetSpec, Generator, RunConfig};
use crate::CliError;

pub fn build_dataset(spec: &DatasetSpec, seed: u64) -> Result<Graph, CliError> {
    let s = spec.seed.unwrap_or(seed);
    let g = match spec.generator {
        Generator::BaShapes => gen_ba_shapes(spec.base_nodes, spec.attach, spec.motifs, s)?,
        Generator::TreeCycles => gen_tree_cycles(spec.tree_depth, spec.cycles, spec.cycle_len, s)?,
        Generator::LoanDecision => gen_loan_decision(spec.applicants, s)?,
        Generator::Files => {
            let dir = spec
                .path
                .as_ref()
                .ok_or_else(|| CliError::Config("dataset.path is not set".into()))?;
            let g = load_graph_dir(dir, spec.num_classes)?;
            if g.train_mask().iter().any(|&m| m) {
                return Ok(g);
            }
            g
        }
    };
    Ok(random_split(g, spec.train_fraction, s)?)
}

pub struct Prepared {
    pub seed: u64,
    pub graph: Graph,
    pub model: GcnModel,
    pub train: Option<TrainReport>,
}

pub fn prepare(cfg: &RunConfig, seed: u64) -> Result<Prepared, CliError> {
    let graph = build_dataset(&cfg.dataset, seed)?;
    let (model, report) = match &cfg.model.path {
        Some(p) => (load_model(p)?.0, None),
        None => {
            let mut model = GcnModel::for_graph(&graph, &cfg.model.hidden, seed)?;
            let tc = TrainConfig {
                seed,
                ..cfg.model.train.clone()
            };
            let report = train(&mut model, &graph, &tc)?;
            (model, Some(report))
        }
    };
    if model.input_dim() != hybridcf::gnn::input_width(&graph) {
        return Err(CliError::Data(format!(
            "model expects {} input features, graph has {}",
            model.input_dim(),
            hybridcf::gnn::input_width(&graph)
        )));
    }
    Ok(Prepared {
        seed,
        graph,
        model,
        train: report,
    })
}

pub fn prepare_all(cfg: &RunConfig) -> Result<Vec<Prepared>, CliError> {
    cfg.seeds.iter().map(|&s| prepare(cfg, s)).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    /// Resolved configuration; `hybridcf <command> --config <out>/config.toml`
    /// replays the run.
    config: &'a RunConfig,
    seeds: Vec<SeedEntry>,
}

#[derive(Serialize)]
struct SeedEntry {
    seed: u64,
    nodes: usize,
    edges: usize,
    targets: usize,
    train_accuracy: Option<f64>,
    test_accuracy: Option<f64>,
    records: Vec<String>,
}

pub fn records_file(method: Method) -> String {
    format!("{method}.records.jsonl")
}

pub fn timings_file(method: Method) -> String {
    format!("{method}.timings.jsonl")
}

pub fn seed_dir(out: &Path, seed: u64) -> std::path::PathBuf {
    out.join(format!("seed-{seed}"))
}

pub fn explainer_config(cfg: &RunConfig, method: Method, seed: u64) -> ExplainConfig {
    let mut ec = ExplainConfig {
        method,
        optimizer: cfg.optimizer.clone(),
        candidates: cfg.candidates.clone(),
        prune: cfg.explain.prune,
    };
    ec.optimizer.seed = seed;
    ec.candidates.seed = seed;
    ec
}

pub struct MethodSummary {
    pub mean: SummaryRow,
    pub std: SummaryRow,
}

/// Runs every method for every prepared seed, writing records, timings,
/// summaries and a manifest under `cfg.out`.
pub fn run_explain(
    cfg: &RunConfig,
    prepared: &[Prepared],
    command: &str,
) -> Result<Vec<MethodSummary>, CliError> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.toml"), cfg.to_toml())?;
    let mut per_method: Vec<Vec<EvaluationReport>> = vec![Vec::new(); cfg.explain.methods.len()];
    let mut entries = Vec::new();
    for p in prepared {
        let dir = seed_dir(&cfg.out, p.seed);
        fs::create_dir_all(&dir)?;
        if let Some(t) = &p.train {
            fs::write(dir.join("train.json"), serde_json::to_string_pretty(t)?)?;
        }
        let targets = select_targets(&p.model, &p.graph, &cfg.targets)?;
        let mut files = Vec::new();
        for (k, &method) in cfg.explain.methods.iter().enumerate() {
            let ex = Explainer::new(&p.model, &p.graph, explainer_config(cfg, method, p.seed))?;
            let runs = ex.explain_all(&targets, cfg.jobs)?;
            let (records, times): (Vec<TargetRecord>, Vec<f64>) = runs.into_iter().unzip();
            write_records(&dir.join(records_file(method)), &records)?;
            let timings: Vec<Timing> = records
                .iter()
                .zip(&times)
                .map(|(r, &seconds)| Timing {
                    target: r.target,
                    seconds,
                })
                .collect();
            write_timings(&dir.join(timings_file(method)), &timings)?;
            per_method[k].push(EvaluationReport::from_records(&records, &times)?);
            files.push(format!("seed-{}/{}", p.seed, records_file(method)));
        }
        entries.push(SeedEntry {
            seed: p.seed,
            nodes: p.graph.node_count(),
            edges: p.graph.edge_count(),
            targets: targets.len(),
            train_accuracy: p.train.as_ref().map(|t| t.train_accuracy),
            test_accuracy: p.train.as_ref().map(|t| t.test_accuracy),
            records: files,
        });
    }
    let summaries: Vec<MethodSummary> = cfg
        .explain
        .methods
        .iter()
        .zip(per_method)
        .map(|(m, reports)| {
            let (mean, std) = aggregate(m.name(), &reports);
            MethodSummary { mean, std }
        })
        .collect();
    write_summaries(&cfg.out, &summaries)?;
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        seeds: entries,
    };
    fs::write(
        cfg.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(summaries)
}

pub fn write_summaries(out: &Path, summaries: &[MethodSummary]) -> Result<(), CliError> {
    let means: Vec<SummaryRow> = summaries.iter().map(|s| s.mean.clone()).collect();
    let stds: Vec<SummaryRow> = summaries.iter().map(|s| s.std.clone()).collect();
    write_summary_csv(&out.join("summary.csv"), &means)?;
    write_summary_csv(&out.join("summary_std.csv"), &stds)?;
    Ok(())
}

pub fn save_trained(p: &Prepared, cfg: &RunConfig, path: &Path) -> Result<(), CliError> {
    let tc = TrainConfig {
        seed: p.seed,
        ..cfg.model.train.clone()
    };
    save_model(&p.model, p.train.as_ref().map(|_| &tc), path)?;
    Ok(())
}
