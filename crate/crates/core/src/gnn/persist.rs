//! Text persistence for trained models.
//!
//! ```text
//! gcn-model v1
//! layers 2
//! dims 1 16 4
//! seed 102
//! train {"learning_rate":0.01,...}      (optional)
//! weight 0 1 16
//! <row-major values, one row per line>
//! bias 0 16
//! <values>
//! ...
//! ```
//! Values carry 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::model::GcnModel;
use super::train::TrainConfig;
use crate::error::{Error, Result};

const MAGIC: &str = "gcn-model v1";

fn fmt_row<'a>(out: &mut String, xs: impl Iterator<Item = &'a f64>) {
    let row: Vec<String> = xs.map(|x| format!("{x:.16e}")).collect();
    out.push_str(&row.join(" "));
    out.push('\n');
}

pub fn format_model(model: &GcnModel, train: Option<&TrainConfig>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "layers {}", model.num_layers());
    let dims: Vec<String> = model.dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "dims {}", dims.join(" "));
    let _ = writeln!(out, "seed {}", model.seed());
    if let Some(cfg) = train {
        let _ = writeln!(
            out,
            "train {}",
            serde_json::to_string(cfg).expect("config serializes")
        );
    }
    for (l, (w, b)) in model.weights().iter().zip(model.biases()).enumerate() {
        let _ = writeln!(out, "weight {l} {} {}", w.nrows(), w.ncols());
        for row in w.rows() {
            fmt_row(&mut out, row.iter());
        }
        let _ = writeln!(out, "bias {l} {}", b.len());
        fmt_row(&mut out, b.iter());
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    origin: &'a str,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l.trim())
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line: self.last,
            msg: msg.into(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`, got `{line}`")));
        }
        Ok(parts.collect())
    }

    fn usizes(&self, parts: &[&str]) -> Result<Vec<usize>> {
        parts
            .iter()
            .map(|p| {
                p.parse()
                    .map_err(|_| self.err(format!("bad integer `{p}`")))
            })
            .collect()
    }

    fn reals(&mut self, expect: usize) -> Result<Vec<f64>> {
        let line = self.next()?;
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(format!("bad real `{t}`"))))
            .collect::<Result<_>>()?;
        if xs.len() != expect {
            return Err(self.err(format!("expected {expect} values, found {}", xs.len())));
        }
        Ok(xs)
    }
}

pub fn parse_model(text: &str, origin: &str) -> Result<(GcnModel, Option<TrainConfig>)> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        origin,
        last: 0,
    };
    if lines.next()? != MAGIC {
        return Err(lines.err(format!("missing `{MAGIC}` header")));
    }
    let k = lines.keyed("layers")?;
    let k = lines.usizes(&k)?;
    let dims = lines.keyed("dims")?;
    let dims = lines.usizes(&dims)?;
    if k.len() != 1 || dims.len() != k[0] + 1 {
        return Err(lines.err("layer count and dims disagree"));
    }
    let seed = lines.keyed("seed")?;
    let seed: u64 = seed
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| lines.err("bad seed"))?;
    let mut train = None;
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    let mut pending = lines.next()?;
    if let Some(json) = pending.strip_prefix("train ") {
        train = Some(serde_json::from_str(json).map_err(|e| lines.err(e.to_string()))?);
        pending = lines.next()?;
    }
    for l in 0..k[0] {
        let want = format!("weight {l} {} {}", dims[l], dims[l + 1]);
        if pending != want {
            return Err(lines.err(format!("expected `{want}`, got `{pending}`")));
        }
        let mut data = Vec::with_capacity(dims[l] * dims[l + 1]);
        for _ in 0..dims[l] {
            data.extend(lines.reals(dims[l + 1])?);
        }
        weights.push(Array2::from_shape_vec((dims[l], dims[l + 1]), data).expect("shape checked"));
        let b = lines.keyed("bias")?;
        if lines.usizes(&b)? != [l, dims[l + 1]] {
            return Err(lines.err("bias header mismatch"));
        }
        biases.push(Array1::from(lines.reals(dims[l + 1])?));
        if l + 1 < k[0] {
            pending = lines.next()?;
        }
    }
    Ok((GcnModel::from_parts(weights, biases, seed)?, train))
}

pub fn save_model(model: &GcnModel, train: Option<&TrainConfig>, path: &Path) -> Result<()> {
    std::fs::write(path, format_model(model, train))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(GcnModel, Option<TrainConfig>)> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text, &path.display().to_string())
}
