use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridcf"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

const SMALL: &str = r#"
seeds = [5]
jobs = 1

[dataset]
generator = "ba-shapes"
base_nodes = 40
attach = 3
motifs = 6

[model]
hidden = [8]

[model.train]
epochs = 150

[optimizer]
max_epochs = 60

[targets]
kind = "sampled"
n = 6
seed = 1
"#;

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    fs::write(&p, SMALL).unwrap();
    p.display().to_string()
}

#[test]
fn help_lists_commands() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for c in [
        "dataset",
        "train",
        "explain",
        "evaluate",
        "sweep-kappa",
        "sweep-cost",
        "sweep-alpha",
        "theory",
        "hypothesis1",
    ] {
        assert!(text.contains(c), "missing {c}");
    }
    let o = bin().args(["dataset", "--help"]).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"));
}

#[test]
fn dataset_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(
            &["dataset", "ba-shapes", "--seed", "102", "--out", out],
            t.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["edges.txt", "features.txt", "labels.txt", "manifest.json"] {
        let a = fs::read(t.path().join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(t.path().join("b").join(f)).unwrap(), "{f}");
    }
    let labels = fs::read_to_string(t.path().join("a/labels.txt")).unwrap();
    assert_eq!(labels.lines().filter(|l| !l.starts_with('#')).count(), 700);
}

#[test]
fn explain_twice_gives_identical_records_and_evaluate_agrees() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path());
    for out in ["r1", "r2"] {
        let o = run(
            &[
                "explain",
                "--config",
                &cfg,
                "--out",
                out,
                "--method",
                "hybrid,random-deletion",
            ],
            t.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["hybrid.records.jsonl", "random-deletion.records.jsonl"] {
        let a = fs::read(t.path().join("r1/seed-5").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, fs::read(t.path().join("r2/seed-5").join(f)).unwrap());
    }
    let summary = fs::read_to_string(t.path().join("r1/summary.csv")).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "method,misclass,fidelity,de_total,de_add,de_del,plausibility,time_sec"
    );
    assert_eq!(summary.lines().count(), 3);
    let o = run(&["evaluate", "--run", "r1"], t.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("summary matches records"));

    // replay from the recorded config
    let o = run(
        &["explain", "--config", "r1/config.toml", "--out", "r3"],
        t.path(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(t.path().join("r1/seed-5/hybrid.records.jsonl")).unwrap(),
        fs::read(t.path().join("r3/seed-5/hybrid.records.jsonl")).unwrap()
    );

    // a tampered summary is caught
    let row = summary.lines().nth(1).unwrap();
    let mut cells: Vec<&str> = row.split(',').collect();
    cells[1] = "0.123456789";
    fs::write(
        t.path().join("r1/summary.csv"),
        summary.replace(row, &cells.join(",")),
    )
    .unwrap();
    assert_eq!(code(&run(&["evaluate", "--run", "r1"], t.path())), 3);
}

#[test]
fn flags_override_file() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path());
    let o = run(
        &[
            "explain",
            "--config",
            &cfg,
            "--out",
            "r",
            "--kappa",
            "2",
            "--no-prune",
            "--targets",
            "ids:0,1",
        ],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let resolved = fs::read_to_string(t.path().join("r/config.toml")).unwrap();
    assert!(resolved.contains("kappa = 2"));
    assert!(resolved.contains("prune = false"));
    let records = fs::read_to_string(t.path().join("r/seed-5/hybrid.records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 2);
    for line in records.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let size =
            v["additions"].as_array().unwrap().len() + v["deletions"].as_array().unwrap().len();
        assert!(size <= 2);
        assert!(v["pruning"].is_null());
    }
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    // config errors
    assert_eq!(
        code(&run(&["explain", "--config", "missing.toml"], t.path())),
        2
    );
    fs::write(t.path().join("bad.toml"), "[optimizer]\nkapa = 3\n").unwrap();
    assert_eq!(
        code(&run(&["explain", "--config", "bad.toml"], t.path())),
        2
    );
    assert_eq!(
        code(&run(&["explain", "--seeds", "1", "--kappa", "0"], t.path())),
        2
    );
    assert_eq!(
        code(&run(&["explain", "--method", "nonsense"], t.path())),
        2
    );
    // data errors
    let d = t.path().join("broken");
    fs::create_dir_all(&d).unwrap();
    fs::write(d.join("edges.txt"), "0 1\n1 x\n").unwrap();
    fs::write(d.join("labels.txt"), "0 0 1\n1 1 1\n").unwrap();
    let o = run(&["explain", "--data", "broken", "--seeds", "1"], t.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("edges.txt:2"));
}

#[test]
fn theory_passes() {
    let t = tempfile::tempdir().unwrap();
    let o = run(
        &["theory", "--models", "500", "--out", "ledger.json"],
        t.path(),
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.matches("PASS").count(), 3);
    let ledger: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger.as_array().unwrap().len(), 3);
}

#[test]
fn cost_sweep_obeys_budget() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path());
    let o = run(
        &[
            "sweep-cost",
            "--config",
            &cfg,
            "--out",
            "s",
            "--values",
            "1,6",
            "--plot-data",
        ],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for (dir, c) in [("cost-1", 1.0), ("cost-6", 6.0)] {
        let records = fs::read_to_string(
            t.path()
                .join("s")
                .join(dir)
                .join("seed-5/hybrid.records.jsonl"),
        )
        .unwrap();
        for line in records.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let adds = v["additions"].as_array().unwrap().len() as f64;
            let dels = v["deletions"].as_array().unwrap().len() as f64;
            assert!(c * adds + dels <= 5.0);
        }
    }
    let plot = fs::read_to_string(t.path().join("s/plot_data.csv")).unwrap();
    assert!(plot.starts_with("parameter,value,method,misclass"));
    assert_eq!(plot.lines().count(), 3);
}

#[test]
fn kappa_sweep_writes_one_report_per_value() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path());
    let o = run(
        &[
            "sweep-kappa",
            "--config",
            &cfg,
            "--out",
            "k",
            "--values",
            "1,3",
        ],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for v in ["kappa-1", "kappa-3"] {
        assert!(t.path().join("k").join(v).join("summary.csv").is_file());
    }
    let o = run(
        &[
            "sweep-alpha",
            "--config",
            &cfg,
            "--out",
            "a",
            "--values",
            "1.5:1,0:0",
        ],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(t.path().join("a/alpha-1.5_1/summary.csv").is_file());
}

#[test]
fn train_and_hypothesis1() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path());
    let o = run(
        &["train", "--config", &cfg, "--out", "m/model.txt"],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("train accuracy"));
    assert!(t.path().join("m/model.txt").is_file());
    let o = run(
        &[
            "hypothesis1",
            "--config",
            &cfg,
            "--model",
            "m/model.txt",
            "--out",
            "h",
            "--targets",
            "sample:4:2",
        ],
        t.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(t.path().join("h/seed-5.hypothesis1.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 4);
}
