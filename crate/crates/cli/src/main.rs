mod config;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hybridcf::explain::{select_targets, Method, TargetSelection};
use hybridcf::io::save_graph;
use hybridcf::metrics::{mean_std, EvaluationReport, Hypothesis1Row};
use hybridcf::report::{
    aggregate, format_mean_std, read_records, read_summary_csv, read_timings, timings_for,
    SummaryRow, SUMMARY_COLUMNS,
};
use hybridcf::theory::run_proposition_suites;

use config::{parse_targets, Generator, RunConfig};
use run::{prepare, prepare_all, run_explain, seed_dir, MethodSummary};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numerical(String),
    /// A check ran and failed.
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<hybridcf::Error> for CliError {
    fn from(e: hybridcf::Error) -> Self {
        use hybridcf::Error as E;
        match e {
            E::Input(_) | E::TooLarge(_) => CliError::Config(e.to_string()),
            E::Parse { .. } | E::Io(_) | E::Json(_) => CliError::Data(e.to_string()),
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::Contract(_) => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Counterfactual explanations for GCN node classification.
#[derive(Parser)]
#[command(name = "hybridcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as text files.
    Dataset(DatasetArgs),
    /// Train a GCN and write its weights.
    Train(TrainArgs),
    /// Explain the selected targets for every seed and method.
    Explain(RunArgs),
    /// Recompute the summary of an explain run from its records.
    Evaluate(EvaluateArgs),
    /// Repeat an explain run over perturbation budgets.
    SweepKappa(SweepArgs),
    /// Repeat an explain run over addition costs.
    SweepCost(SweepArgs),
    /// Repeat an explain run over plausibility weights `deg:motif`.
    SweepAlpha(SweepArgs),
    /// Check the additive-model propositions on random models.
    Theory(TheoryArgs),
    /// Compare attack additions with minimum counterfactuals.
    Hypothesis1(Hypothesis1Args),
}

#[derive(Args)]
struct DatasetArgs {
    generator: Generator,
    #[arg(long, default_value_t = 102)]
    seed: u64,
    #[arg(long, default_value = "data")]
    out: PathBuf,
    #[arg(long)]
    base_nodes: Option<usize>,
    #[arg(long)]
    attach: Option<usize>,
    #[arg(long)]
    motifs: Option<usize>,
    #[arg(long)]
    applicants: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Read the graph from this directory instead of generating it.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    generator: Option<Generator>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Pre-trained model file.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    base: ConfigArgs,
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    base: ConfigArgs,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    /// Skip post-hoc pruning.
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    addition_cost: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// `correct`, `misclassified`, `ids:1,2,3` or `sample:N[:SEED]`.
    #[arg(long, value_parser = parse_targets)]
    targets: Option<TargetSelection>,
    /// Worker threads per run.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Output directory of an explain run.
    #[arg(long)]
    run: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<String>>,
    /// Also write a single long-format table of every sweep point.
    #[arg(long)]
    plot_data: bool,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long, default_value_t = 10_000)]
    models: usize,
    #[arg(long, default_value_t = 102)]
    seed: u64,
    /// Write the ledger as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Hypothesis1Args {
    #[command(flatten)]
    run: RunArgs,
}

fn resolve(base: &ConfigArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(base.config.as_deref())?;
    if let Some(d) = &base.data {
        cfg.dataset.generator = Generator::Files;
        cfg.dataset.path = Some(d.clone());
    }
    if let Some(g) = base.generator {
        cfg.dataset.generator = g;
    }
    if let Some(s) = &base.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(m) = &base.model {
        cfg.model.path = Some(m.clone());
    }
    if let Some(o) = &base.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn resolve_run(a: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = resolve(&a.base)?;
    if let Some(m) = &a.method {
        cfg.explain.methods = m.clone();
    }
    if a.no_prune {
        cfg.explain.prune = false;
    }
    if let Some(k) = a.kappa {
        cfg.optimizer.kappa = k;
    }
    if let Some(c) = a.addition_cost {
        cfg.optimizer.addition_cost = c;
    }
    if let Some(e) = a.max_epochs {
        cfg.optimizer.max_epochs = e;
    }
    if let Some(t) = &a.targets {
        cfg.targets = t.clone();
    }
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summaries(summaries: &[MethodSummary]) {
    for s in summaries {
        println!("{}", format_mean_std(&s.mean, &s.std));
    }
}

fn cmd_dataset(a: &DatasetArgs) -> Result<(), CliError> {
    if a.generator == Generator::Files {
        return Err(CliError::Config("`files` is not a generator".into()));
    }
    let mut spec = config::DatasetSpec {
        generator: a.generator,
        ..Default::default()
    };
    spec.base_nodes = a.base_nodes.unwrap_or(spec.base_nodes);
    spec.attach = a.attach.unwrap_or(spec.attach);
    spec.motifs = a.motifs.unwrap_or(spec.motifs);
    spec.applicants = a.applicants.unwrap_or(spec.applicants);
    spec.train_fraction = a.train_fraction.unwrap_or(spec.train_fraction);
    let g = run::build_dataset(&spec, a.seed)?;
    save_graph(&g, &a.out)?;
    #[derive(Serialize)]
    struct DatasetManifest<'a> {
        seed: u64,
        spec: &'a config::DatasetSpec,
        nodes: usize,
        edges: usize,
        classes: usize,
    }
    let m = DatasetManifest {
        seed: a.seed,
        spec: &spec,
        nodes: g.node_count(),
        edges: g.edge_count(),
        classes: g.num_classes(),
    };
    fs::write(
        a.out.join("manifest.json"),
        serde_json::to_string_pretty(&m)? + "\n",
    )?;
    println!(
        "{} nodes, {} edges -> {}",
        g.node_count(),
        g.edge_count(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.base)?;
    cfg.model.path = None;
    if let Some(h) = &a.hidden {
        cfg.model.hidden = h.clone();
    }
    if let Some(e) = a.epochs {
        cfg.model.train.epochs = e;
    }
    if let Some(lr) = a.lr {
        cfg.model.train.learning_rate = lr;
    }
    cfg.validate()?;
    let out = a
        .base
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("model.txt"));
    for &seed in &cfg.seeds {
        let p = prepare(&cfg, seed)?;
        let path = if cfg.seeds.len() == 1 {
            out.clone()
        } else {
            out.with_extension(format!("seed-{seed}.txt"))
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        run::save_trained(&p, &cfg, &path)?;
        let r = p.train.as_ref().expect("freshly trained");
        fs::write(
            path.with_extension("report.json"),
            serde_json::to_string_pretty(r)?,
        )?;
        println!(
            "seed {seed}: train accuracy {:.4}, test accuracy {:.4} -> {}",
            r.train_accuracy,
            r.test_accuracy,
            path.display()
        );
    }
    Ok(())
}

fn cmd_explain(a: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_run(a)?;
    let prepared = prepare_all(&cfg)?;
    for p in &prepared {
        if let Some(t) = &p.train {
            println!("seed {}: train accuracy {:.4}", p.seed, t.train_accuracy);
        }
    }
    let summaries = run_explain(&cfg, &prepared, "explain")?;
    print_summaries(&summaries);
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(Some(&a.run.join("config.toml")))?;
    let mut summaries = Vec::new();
    for &method in &cfg.explain.methods {
        let mut reports = Vec::new();
        for &seed in &cfg.seeds {
            let dir = seed_dir(&a.run, seed);
            let records = read_records(&dir.join(run::records_file(method)))?;
            let timings = read_timings(&dir.join(run::timings_file(method)))?;
            reports.push(EvaluationReport::from_records(
                &records,
                &timings_for(&records, &timings),
            )?);
        }
        let (mean, std) = aggregate(method.name(), &reports);
        summaries.push(MethodSummary { mean, std });
    }
    print_summaries(&summaries);
    let stored = a.run.join("summary.csv");
    if stored.is_file() {
        let old = read_summary_csv(&stored)?;
        let fresh: Vec<SummaryRow> = summaries.iter().map(|s| s.mean.clone()).collect();
        if !rows_match(&old, &fresh) {
            return Err(CliError::Data(format!(
                "{} disagrees with its records",
                stored.display()
            )));
        }
        println!("summary matches records");
    } else {
        run::write_summaries(&a.run, &summaries)?;
    }
    Ok(())
}

fn rows_match(a: &[SummaryRow], b: &[SummaryRow]) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs());
    let oclose = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => close(x, y),
        (None, None) => true,
        _ => false,
    };
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.method == y.method
                && close(x.misclass, y.misclass)
                && close(x.fidelity, y.fidelity)
                && oclose(x.de_total, y.de_total)
                && oclose(x.de_add, y.de_add)
                && oclose(x.de_del, y.de_del)
                && oclose(x.plausibility, y.plausibility)
                && close(x.time_sec, y.time_sec)
        })
}

#[derive(Clone, Copy)]
enum Sweep {
    Kappa,
    Cost,
    Alpha,
}

impl Sweep {
    fn name(self) -> &'static str {
        match self {
            Sweep::Kappa => "kappa",
            Sweep::Cost => "cost",
            Sweep::Alpha => "alpha",
        }
    }

    fn defaults(self) -> &'static [&'static str] {
        match self {
            Sweep::Kappa => &["1", "3", "5", "10", "15"],
            Sweep::Cost => &["0.5", "1", "2", "5", "6", "10", "21"],
            Sweep::Alpha => &["0:0", "1.5:0", "0:1", "1.5:1", "3:1"],
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: &str) -> Result<(), CliError> {
        let bad = || CliError::Config(format!("bad {} value {value:?}", self.name()));
        match self {
            Sweep::Kappa => cfg.optimizer.kappa = value.parse().map_err(|_| bad())?,
            Sweep::Cost => cfg.optimizer.addition_cost = value.parse().map_err(|_| bad())?,
            Sweep::Alpha => {
                let (d, m) = value.split_once(':').ok_or_else(bad)?;
                cfg.optimizer.alpha_deg = d.parse().map_err(|_| bad())?;
                cfg.optimizer.alpha_motif = m.parse().map_err(|_| bad())?;
            }
        }
        cfg.optimizer
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Serialize)]
struct PlotRow<'a> {
    parameter: &'a str,
    value: &'a str,
    #[serde(flatten)]
    row: SummaryRow,
}

fn cmd_sweep(a: &SweepArgs, sweep: Sweep) -> Result<(), CliError> {
    let base = resolve_run(&a.run)?;
    let values: Vec<String> = match &a.values {
        Some(v) => v.clone(),
        None => sweep.defaults().iter().map(|s| s.to_string()).collect(),
    };
    let mut points = Vec::new();
    for v in &values {
        let mut cfg = base.clone();
        sweep.apply(&mut cfg, v)?;
        points.push(cfg);
    }
    let prepared = prepare_all(&base)?;
    let mut plot = Vec::new();
    for (v, mut cfg) in values.iter().zip(points) {
        cfg.out = base
            .out
            .join(format!("{}-{}", sweep.name(), v.replace(':', "_")));
        println!("{} = {v}", sweep.name());
        let summaries = run_explain(&cfg, &prepared, &format!("sweep-{}", sweep.name()))?;
        print_summaries(&summaries);
        plot.extend(summaries.into_iter().map(|s| PlotRow {
            parameter: sweep.name(),
            value: v,
            row: s.mean,
        }));
    }
    if a.plot_data {
        fs::create_dir_all(&base.out)?;
        let path = base.out.join("plot_data.csv");
        let mut text = format!("parameter,value,{}\n", SUMMARY_COLUMNS.join(","));
        let cell = |x: Option<f64>| x.map(|x| x.to_string()).unwrap_or_default();
        for p in &plot {
            let r = &p.row;
            text += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.parameter,
                p.value,
                r.method,
                r.misclass,
                r.fidelity,
                cell(r.de_total),
                cell(r.de_add),
                cell(r.de_del),
                cell(r.plausibility),
                r.time_sec
            );
        }
        fs::write(&path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_theory(a: &TheoryArgs) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let suites = run_proposition_suites(&mut rng, a.models)?;
    for s in &suites {
        let mark = if s.passed() { "PASS" } else { "FAIL" };
        println!(
            "{mark} {:<28} {} cases, {} failures",
            s.name, s.cases, s.failures
        );
        for c in &s.counterexamples {
            println!("    counterexample: {c}");
        }
    }
    if let Some(out) = &a.out {
        fs::write(out, serde_json::to_string_pretty(&suites)? + "\n")?;
    }
    let failed = suites.iter().filter(|s| !s.passed()).count();
    if failed > 0 {
        return Err(CliError::Failed(format!(
            "{failed} proposition suite(s) failed"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct H1Summary {
    seed: u64,
    targets: usize,
    attack_successes: usize,
    with_counterfactual: usize,
    success: Option<[f64; 3]>,
    failure: Option<[f64; 3]>,
}

fn h1_means(rows: &[&Hypothesis1Row]) -> Option<[f64; 3]> {
    let sims: Vec<_> = rows.iter().filter_map(|r| r.similarity).collect();
    if sims.is_empty() {
        return None;
    }
    let m = |f: fn(&hybridcf::metrics::Similarity) -> f64| {
        mean_std(&sims.iter().map(f).collect::<Vec<_>>()).0
    };
    Some([m(|s| s.ged), m(|s| s.mcs), m(|s| s.gev)])
}

fn cmd_hypothesis1(a: &Hypothesis1Args) -> Result<(), CliError> {
    let mut cfg = resolve_run(&a.run)?;
    if a.run.targets.is_none() && cfg.targets == TargetSelection::AllCorrect {
        cfg.targets = TargetSelection::Sampled { n: 100, seed: 0 };
    }
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("config.toml"), cfg.to_toml())?;
    let mut summaries = Vec::new();
    for &seed in &cfg.seeds {
        let p = prepare(&cfg, seed)?;
        let targets = select_targets(&p.model, &p.graph, &cfg.targets)?;
        let rows = hybridcf::metrics::hypothesis1_experiment(
            &p.model,
            &p.graph,
            &targets,
            cfg.optimizer.kappa,
            cfg.candidates.far_pool,
            seed,
        )?;
        let path = cfg.out.join(format!("seed-{seed}.hypothesis1.jsonl"));
        let mut text = String::new();
        for r in &rows {
            text += &serde_json::to_string(r)?;
            text.push('\n');
        }
        fs::write(&path, text)?;
        let ok: Vec<&Hypothesis1Row> = rows.iter().filter(|r| r.attack_success).collect();
        let bad: Vec<&Hypothesis1Row> = rows.iter().filter(|r| !r.attack_success).collect();
        let s = H1Summary {
            seed,
            targets: rows.len(),
            attack_successes: ok.len(),
            with_counterfactual: rows.iter().filter(|r| r.counterfactual.is_some()).count(),
            success: h1_means(&ok),
            failure: h1_means(&bad),
        };
        let fmt = |x: Option<[f64; 3]>| match x {
            Some([g, m, e]) => format!("GED {g:.3} MCS {m:.3} GEV {e:.3}"),
            None => "-".into(),
        };
        println!(
            "seed {seed}: {} targets, {} attack successes; success {}; failure {}",
            s.targets,
            s.attack_successes,
            fmt(s.success),
            fmt(s.failure)
        );
        summaries.push(s);
    }
    fs::write(
        cfg.out.join("hypothesis1.json"),
        serde_json::to_string_pretty(&summaries)? + "\n",
    )?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Dataset(a) => cmd_dataset(a),
        Command::Train(a) => cmd_train(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::SweepKappa(a) => cmd_sweep(a, Sweep::Kappa),
        Command::SweepCost(a) => cmd_sweep(a, Sweep::Cost),
        Command::SweepAlpha(a) => cmd_sweep(a, Sweep::Alpha),
        Command::Theory(a) => cmd_theory(a),
        Command::Hypothesis1(a) => cmd_hypothesis1(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
