//! Compressed-row sparse matrix for the 5-point stencil operators.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    entries: Vec<f64>,
}

impl SparseOperator {
    pub fn from_csr(n: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>, entries: Vec<f64>) -> Result<Self> {
        if row_offsets.len() != n + 1
            || row_offsets[n] != col_indices.len()
            || col_indices.len() != entries.len()
            || row_offsets.windows(2).any(|w| w[0] > w[1])
            || col_indices.iter().any(|&c| c >= n)
        {
            return Err(Error::InvalidArgument("malformed CSR arrays".into()));
        }
        Ok(Self { n, row_offsets, col_indices, entries })
    }

    /// Builds from per-row `(column, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut entries = Vec::new();
        row_offsets.push(0);
        for row in rows {
            for (c, v) in row {
                col_indices.push(c);
                entries.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_csr(n, row_offsets, col_indices, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            entries: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[span.clone()].iter().copied().zip(self.entries[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|&(col, _)| col == c).map(|(_, v)| v).sum()
    }

    /// `y = A x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.entries[k] * x[self.col_indices[k]];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    /// `I - scale * A`, same sparsity pattern (the stencil always stores the diagonal).
    pub fn identity_minus(&self, scale: f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.n {
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                let delta = if self.col_indices[k] == r { 1.0 } else { 0.0 };
                out.entries[k] = delta - scale * self.entries[k];
            }
        }
        out
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (r, row) in dense.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        dense
    }
}
