//! Compressed sparse row storage.

use rayon::prelude::*;

use super::SolveError;
use crate::dense::DMat;

/// Rows above this count are multiplied on the worker pool.
const PARALLEL_ROWS: usize = 20_000;

/// Sparse matrix in compressed sparse row form.
///
/// Column indices are strictly increasing within each row. Explicit zeros
/// may be stored but never twice at the same position.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCSR {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSR {
    /// Builds a matrix from raw parts, checking the structural invariants.
    pub fn from_raw_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SolveError> {
        let bad = |msg: &str| Err(SolveError::InvalidStructure(msg.to_string()));
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 {
            return bad("row offsets must have length nrows + 1 and start at 0");
        }
        if col_idx.len() != values.len() || *row_ptr.last().unwrap() != col_idx.len() {
            return bad("row offsets, column indices and values disagree in length");
        }
        for i in 0..nrows {
            if row_ptr[i] > row_ptr[i + 1] {
                return bad("row offsets must be nondecreasing");
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad("column indices must be strictly increasing within a row");
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(SolveError::IndexOutOfRange { row: i, col: *cols.last().unwrap(), nrows, ncols });
            }
        }
        Ok(Self { nrows, ncols, row_ptr, col_idx, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, ncols: n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn from_dense(m: &DMat) -> Self {
        let mut row_ptr = vec![0];
        let (mut col_idx, mut values) = (Vec::new(), Vec::new());
        for i in 0..m.nrows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows: m.nrows(), ncols: m.ncols(), row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Stored value at `(i, j)`, zero if absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMat {
        let mut d = DMat::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                col_idx[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// Largest `|A_ij - A_ji|` over all stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, SolveError> {
        if x.len() != self.ncols {
            return Err(SolveError::DimensionMismatch { expected: self.ncols, got: x.len() });
        }
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without allocation. Panics on dimension mismatch.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "matvec: x has wrong length");
        assert_eq!(y.len(), self.nrows, "matvec: y has wrong length");
        let row_dot = |i: usize| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum::<f64>()
        };
        if self.nrows >= PARALLEL_ROWS {
            crate::thread_pool().install(|| {
                y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
            });
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
    }

    /// Symmetric permutation `P A Pᵀ` with `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let n = self.nrows;
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                trip.push((inv[i], inv[j], v));
            }
        }
        csr_from_triplets(n, n, &trip).expect("permutation keeps indices in range")
    }
}

/// Builds a CSR matrix from `(row, col, value)` triplets, summing duplicates
/// in input order so the result is bit-for-bit reproducible.
pub fn csr_from_triplets(
    nrows: usize,
    ncols: usize,
    triplets: &[(usize, usize, f64)],
) -> Result<SparseMatrixCSR, SolveError> {
    if let Some(&(row, col, _)) = triplets.iter().find(|&&(i, j, _)| i >= nrows || j >= ncols) {
        return Err(SolveError::IndexOutOfRange { row, col, nrows, ncols });
    }
    // stable bucket by row keeps the input order within each row
    let mut start = vec![0usize; nrows + 1];
    for &(i, _, _) in triplets {
        start[i + 1] += 1;
    }
    for i in 0..nrows {
        start[i + 1] += start[i];
    }
    let mut next = start.clone();
    let mut by_row = vec![(0usize, 0.0f64); triplets.len()];
    for &(i, j, v) in triplets {
        by_row[next[i]] = (j, v);
        next[i] += 1;
    }
    let mut row_ptr = Vec::with_capacity(nrows + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::with_capacity(triplets.len());
    let mut values = Vec::with_capacity(triplets.len());
    for i in 0..nrows {
        let row = &mut by_row[start[i]..start[i + 1]];
        row.sort_by_key(|&(j, _)| j);
        for &(j, v) in row.iter() {
            if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
            }
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseMatrixCSR { nrows, ncols, row_ptr, col_idx, values })
}
