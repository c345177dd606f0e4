//! Plain-text graph files.
//!
//! * edge list: one `u v` pair per line, zero-based ids, `u < v`, sorted;
//! * features: one comma-separated row per node, line `i` is node `i`;
//! * labels: one `node_id label train_flag` triple per line.
//!
//! Blank lines and lines starting with `#` are ignored on load.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        let _ = writeln!(out, "{} {}", e.u, e.v);
    }
    out
}

/// Parses an edge list. With `node_count = None` the count is `max id + 1`.
pub fn parse_edge_list(text: &str, node_count: Option<usize>, origin: &str) -> Result<Vec<Edge>> {
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (lineno, line) in content_lines(text) {
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(
                origin,
                lineno,
                format!("expected `u v`, got `{line}`"),
            ));
        };
        let a: NodeId = a
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad node id `{a}`")))?;
        let b: NodeId = b
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad node id `{b}`")))?;
        if a == b {
            return Err(parse_err(origin, lineno, format!("self-loop on node {a}")));
        }
        if let Some(n) = node_count {
            if a >= n || b >= n {
                return Err(parse_err(
                    origin,
                    lineno,
                    format!("node id {} exceeds node_count {n}", a.max(b)),
                ));
            }
        }
        let e = Edge::new(a, b);
        if !seen.insert(e) {
            return Err(parse_err(origin, lineno, format!("duplicate edge {e}")));
        }
        edges.push(e);
    }
    Ok(edges)
}

pub fn save_edge_list(g: &Graph, path: &Path) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

/// Loads a topology-only graph.
pub fn load_edge_list(path: &Path, node_count: Option<usize>) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    let edges = parse_edge_list(&text, node_count, &path.display().to_string())?;
    let n = node_count.unwrap_or_else(|| edges.iter().map(|e| e.v + 1).max().unwrap_or(0));
    Graph::from_edges(n, edges.iter().map(|e| (e.u, e.v)))
}

pub fn format_features(g: &Graph) -> String {
    let mut out = String::new();
    for v in 0..g.node_count() {
        let row: Vec<String> = g.features(v).iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses `node_count` feature rows; returns `(dim, row-major data)`.
/// Every line counts here, blank lines being zero-width rows.
pub fn parse_features(text: &str, node_count: usize, origin: &str) -> Result<(usize, Vec<f64>)> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != node_count {
        return Err(parse_err(
            origin,
            lines.len().min(node_count) + 1,
            format!("expected {node_count} feature rows, found {}", lines.len()),
        ));
    }
    let mut dim = None;
    let mut data = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let line = line.trim();
        let row: Vec<f64> = if line.is_empty() {
            Vec::new()
        } else {
            line.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| parse_err(origin, i + 1, format!("bad real `{tok}`")))
                })
                .collect::<Result<_>>()?
        };
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_err(
                    origin,
                    i + 1,
                    format!("row has {} values, expected {d}", row.len()),
                ))
            }
            _ => {}
        }
        data.extend(row);
    }
    Ok((dim.unwrap_or(0), data))
}

pub fn save_features(g: &Graph, path: &Path) -> Result<()> {
    fs::write(path, format_features(g))?;
    Ok(())
}

pub fn load_features(path: &Path, node_count: usize) -> Result<(usize, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    parse_features(&text, node_count, &path.display().to_string())
}

pub fn format_labels(g: &Graph) -> String {
    let mut out = String::new();
    for v in 0..g.node_count() {
        let _ = writeln!(out, "{} {} {}", v, g.label(v), u8::from(g.train_mask()[v]));
    }
    out
}

/// Parses label triples; every node `0..n` must appear exactly once.
pub fn parse_labels(text: &str, origin: &str) -> Result<(Vec<usize>, Vec<bool>)> {
    let mut rows: Vec<(usize, usize, bool, usize)> = Vec::new();
    for (lineno, line) in content_lines(text) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(
                origin,
                lineno,
                format!("expected `node label train_flag`, got `{line}`"),
            ));
        }
        let node: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad node id `{}`", parts[0])))?;
        let label: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad label `{}`", parts[1])))?;
        let flag = match parts[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_err(
                    origin,
                    lineno,
                    format!("bad train flag `{other}`"),
                ))
            }
        };
        rows.push((node, label, flag, lineno));
    }
    let n = rows.len();
    let mut labels = vec![usize::MAX; n];
    let mut mask = vec![false; n];
    for (node, label, flag, lineno) in rows {
        if node >= n {
            return Err(parse_err(
                origin,
                lineno,
                format!("node id {node} out of range 0..{n}"),
            ));
        }
        if labels[node] != usize::MAX {
            return Err(parse_err(
                origin,
                lineno,
                format!("node {node} listed twice"),
            ));
        }
        labels[node] = label;
        mask[node] = flag;
    }
    Ok((labels, mask))
}

pub fn save_labels(g: &Graph, path: &Path) -> Result<()> {
    fs::write(path, format_labels(g))?;
    Ok(())
}

pub fn load_labels(path: &Path) -> Result<(Vec<usize>, Vec<bool>)> {
    let text = fs::read_to_string(path)?;
    parse_labels(&text, &path.display().to_string())
}

/// Loads a full graph; the node count comes from the labels file.
pub fn load_graph(
    edges: &Path,
    features: Option<&Path>,
    labels: &Path,
    num_classes: Option<usize>,
) -> Result<Graph> {
    let (labels, mask) = load_labels(labels)?;
    let n = labels.len();
    let mut g = load_edge_list(edges, Some(n))?;
    if let Some(fp) = features {
        let (dim, data) = load_features(fp, n)?;
        g = g.with_features(dim, data)?;
    }
    g.with_labels(labels, mask, num_classes)
}

/// Writes `edges.txt`, `features.txt` and `labels.txt` into `dir`.
pub fn save_graph(g: &Graph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    save_edge_list(g, &dir.join("edges.txt"))?;
    save_features(g, &dir.join("features.txt"))?;
    save_labels(g, &dir.join("labels.txt"))?;
    Ok(())
}

pub fn load_graph_dir(dir: &Path, num_classes: Option<usize>) -> Result<Graph> {
    let feats = dir.join("features.txt");
    load_graph(
        &dir.join("edges.txt"),
        feats.exists().then_some(feats.as_path()),
        &dir.join("labels.txt"),
        num_classes,
    )
}
