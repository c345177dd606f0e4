//! Run outputs on disk: per-target records as JSON lines, a timing sidecar,
//! and the summary table.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::TargetRecord;
use crate::graph::NodeId;
use crate::metrics::{mean_std, EvaluationReport};

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "method",
    "misclass",
    "fidelity",
    "de_total",
    "de_add",
    "de_del",
    "plausibility",
    "time_sec",
];

/// One summary line. Empty cells mean no successful target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub misclass: f64,
    pub fidelity: f64,
    pub de_total: Option<f64>,
    pub de_add: Option<f64>,
    pub de_del: Option<f64>,
    pub plausibility: Option<f64>,
    pub time_sec: f64,
}

impl SummaryRow {
    pub fn from_report(method: impl Into<String>, r: &EvaluationReport) -> Self {
        SummaryRow {
            method: method.into(),
            misclass: r.misclassification_rate,
            fidelity: r.fidelity,
            de_total: r.mean_explanation_size,
            de_add: r.mean_additions,
            de_del: r.mean_deletions,
            plausibility: r.mean_plausibility,
            time_sec: r.mean_time_seconds,
        }
    }
}

/// Mean and standard deviation across seeds, column by column. Optional
/// columns average the seeds that have a value.
pub fn aggregate(method: &str, reports: &[EvaluationReport]) -> (SummaryRow, SummaryRow) {
    let rows: Vec<SummaryRow> = reports
        .iter()
        .map(|r| SummaryRow::from_report(method, r))
        .collect();
    let col = |f: &dyn Fn(&SummaryRow) -> f64| mean_std(&rows.iter().map(f).collect::<Vec<_>>());
    let opt = |f: &dyn Fn(&SummaryRow) -> Option<f64>| {
        let xs: Vec<f64> = rows.iter().filter_map(f).collect();
        (!xs.is_empty()).then(|| mean_std(&xs))
    };
    let (misclass, fidelity, time) = (
        col(&|r| r.misclass),
        col(&|r| r.fidelity),
        col(&|r| r.time_sec),
    );
    let (tot, add, del, plau) = (
        opt(&|r| r.de_total),
        opt(&|r| r.de_add),
        opt(&|r| r.de_del),
        opt(&|r| r.plausibility),
    );
    let pick = |i: usize| SummaryRow {
        method: method.to_string(),
        misclass: [misclass.0, misclass.1][i],
        fidelity: [fidelity.0, fidelity.1][i],
        de_total: tot.map(|x| [x.0, x.1][i]),
        de_add: add.map(|x| [x.0, x.1][i]),
        de_del: del.map(|x| [x.0, x.1][i]),
        plausibility: plau.map(|x| [x.0, x.1][i]),
        time_sec: [time.0, time.1][i],
    };
    (pick(0), pick(1))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    if rows.is_empty() {
        w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    if header != SUMMARY_COLUMNS {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: format!("unexpected summary columns {header:?}"),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::input(format!("csv: {other:?}")),
    }
}

/// Human-readable `mean ± std` line for a summary pair.
pub fn format_mean_std(mean: &SummaryRow, std: &SummaryRow) -> String {
    let pair = |m: f64, s: f64| format!("{m:.3}±{s:.3}");
    let opt = |m: Option<f64>, s: Option<f64>| match (m, s) {
        (Some(m), Some(s)) => pair(m, s),
        _ => "-".to_string(),
    };
    format!(
        "{:<26} misclass {}  fidelity {}  ΔE {} ({} / {})  plaus {}  time {:.3}s",
        mean.method,
        pair(mean.misclass, std.misclass),
        pair(mean.fidelity, std.fidelity),
        opt(mean.de_total, std.de_total),
        opt(mean.de_add, std.de_add),
        opt(mean.de_del, std.de_del),
        opt(mean.plausibility, std.plausibility),
        mean.time_sec,
    )
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let r = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[TargetRecord]) -> Result<()> {
    write_lines(path, records)
}

pub fn read_records(path: &Path) -> Result<Vec<TargetRecord>> {
    read_lines(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub target: NodeId,
    pub seconds: f64,
}

pub fn write_timings(path: &Path, timings: &[Timing]) -> Result<()> {
    write_lines(path, timings)
}

pub fn read_timings(path: &Path) -> Result<Vec<Timing>> {
    read_lines(path)
}

/// Pairs records with the sidecar timings by target id; a missing sidecar
/// entry counts as zero seconds.
pub fn timings_for(records: &[TargetRecord], timings: &[Timing]) -> Vec<f64> {
    records
        .iter()
        .map(|r| {
            timings
                .iter()
                .find(|t| t.target == r.target)
                .map_or(0.0, |t| t.seconds)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{ExplainConfig, Explainer};
    use crate::testutil::toy;

    #[test]
    fn records_round_trip() {
        let (g, m) = toy();
        let ex = Explainer::new(&m, &g, ExplainConfig::default()).unwrap();
        let runs = ex.explain_all(&[0, 3, 6], 1).unwrap();
        let records: Vec<TargetRecord> = runs.iter().map(|r| r.0.clone()).collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("records.jsonl");
        write_records(&p, &records).unwrap();
        assert_eq!(read_records(&p).unwrap(), records);
        let first = fs::read(&p).unwrap();
        write_records(&p, &read_records(&p).unwrap()).unwrap();
        assert_eq!(fs::read(&p).unwrap(), first);

        let t: Vec<Timing> = runs
            .iter()
            .map(|r| Timing {
                target: r.0.target,
                seconds: r.1,
            })
            .collect();
        let tp = dir.path().join("timings.jsonl");
        write_timings(&tp, &t).unwrap();
        assert_eq!(
            timings_for(&records, &read_timings(&tp).unwrap()),
            runs.iter().map(|r| r.1).collect::<Vec<_>>()
        );
    }

    #[test]
    fn summary_csv_columns_and_blanks() {
        let row = SummaryRow {
            method: "hybrid".into(),
            misclass: 0.75,
            fidelity: 0.25,
            de_total: None,
            de_add: None,
            de_del: None,
            plausibility: Some(0.5),
            time_sec: 0.1,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("summary.csv");
        write_summary_csv(&p, std::slice::from_ref(&row)).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));
        assert_eq!(text.lines().nth(1).unwrap(), "hybrid,0.75,0.25,,,,0.5,0.1");
        assert_eq!(read_summary_csv(&p).unwrap(), vec![row]);
        write_summary_csv(&p, &[]).unwrap();
        assert!(read_summary_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn aggregate_across_seeds() {
        let rep = |m: f64, size: Option<f64>| EvaluationReport {
            method: None,
            n_targets: 4,
            n_successes: 0,
            misclassification_rate: m,
            fidelity: 0.0,
            mean_explanation_size: size,
            mean_additions: size,
            mean_deletions: size.map(|_| 0.0),
            mean_plausibility: None,
            mean_time_seconds: 1.0,
        };
        let (mean, std) = aggregate(
            "x",
            &[rep(0.5, Some(1.0)), rep(1.0, None), rep(0.75, Some(3.0))],
        );
        assert_eq!(mean.misclass, 0.75);
        assert!((std.misclass - 0.25).abs() < 1e-12);
        assert_eq!(mean.de_total, Some(2.0));
        assert_eq!(mean.plausibility, None);
        assert_eq!(std.time_sec, 0.0);
    }
}
