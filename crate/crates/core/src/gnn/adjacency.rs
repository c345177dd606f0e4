//! Weighted local adjacency and its symmetric normalization
//! `Â = D^{-1/2} (A + I) D^{-1/2}`.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Sparse symmetric `Â` in CSR form, diagonal included.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    n: usize,
    /// `D_ii = 1 + Σ_j A_ij`
    degree: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl NormalizedAdjacency {
    /// Normalizes a weighted undirected edge list over `n` nodes. Each pair
    /// must appear once; weights are expected in `[0, 1]`. Zero-weight pairs
    /// are kept as explicit (zero) entries so their gradients stay addressable.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut degree = vec![1.0; n];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::contract(format!(
                    "bad local edge ({i}, {j}) for n = {n}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::Numerical(format!("edge ({i}, {j}) has weight {w}")));
            }
            degree[i] += w;
            degree[j] += w;
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter_mut().enumerate() {
            row.push((i, 1.0));
            row.sort_unstable_by_key(|&(j, _)| j);
            for pair in row.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(Error::contract(format!(
                        "local edge ({i}, {}) listed twice",
                        pair[0].0
                    )));
                }
            }
            for &(j, w) in row.iter() {
                cols.push(j);
                vals.push(w / (degree[i] * degree[j]).sqrt());
            }
            row_ptr.push(cols.len());
        }
        Ok(NormalizedAdjacency {
            n,
            degree,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// `(column, value)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// `Â · x`
    pub fn matmul(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, x.ncols()));
        for i in 0..self.n {
            let mut out_row = out.row_mut(i);
            for (j, a) in self.row(i) {
                if a != 0.0 {
                    out_row.scaled_add(a, &x.row(j));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                d[[i, j]] = a;
            }
        }
        d
    }
}

/// Dense normalization of a symmetric adjacency with entries in `[0, 1]`.
pub fn normalize_dense(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::contract("adjacency must be square"));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        if a[[i, i]] != 0.0 {
            return Err(Error::contract(format!("adjacency has a self-loop at {i}")));
        }
        for j in i + 1..n {
            if a[[i, j]] != a[[j, i]] {
                return Err(Error::contract(format!(
                    "adjacency asymmetric at ({i}, {j})"
                )));
            }
            if a[[i, j]] != 0.0 {
                edges.push((i, j, a[[i, j]]));
            }
        }
    }
    Ok(NormalizedAdjacency::from_weighted_edges(n, &edges)?.to_dense())
}
