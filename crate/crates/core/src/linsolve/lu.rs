//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are processed in a prescribed fill-reducing order. Each column is
//! obtained by a sparse triangular solve against the already computed part of
//! `L`, whose nonzero pattern is found by depth-first search. The diagonal
//! entry is kept as pivot whenever it is within a fixed factor of the largest
//! candidate, which preserves the symmetric ordering on the positive definite
//! parts of a saddle-point matrix and pivots off-diagonal where it must.

use super::{SolveError, SparseMatrixCSR};

/// The diagonal pivot is kept if it is at least this fraction of the column maximum.
const DIAGONAL_PREFERENCE: f64 = 1e-3;

/// Pivots below this fraction of the column's largest input entry are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Compressed sparse column storage used for the factors.
#[derive(Debug, Clone, Default)]
struct Csc {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Factorization `P A Q = L U` with unit lower-triangular `L`.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// Column order, `q[k]` is the original column eliminated at step `k`.
    q: Vec<usize>,
    /// Row pivots, `pinv[i]` is the step at which original row `i` was pivotal.
    pinv: Vec<usize>,
    /// Unit diagonal stored first in each column.
    l: Csc,
    /// Diagonal stored last in each column.
    u: Csc,
    off_diagonal_pivots: usize,
}

impl SparseLu {
    /// Factors `a` eliminating columns in the order `q` (`q[k]` = original column).
    pub fn factor(a: &SparseMatrixCSR, q: &[usize]) -> Result<Self, SolveError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolveError::DimensionMismatch { expected: n, got: a.ncols() });
        }
        if q.len() != n {
            return Err(SolveError::DimensionMismatch { expected: n, got: q.len() });
        }
        // columns of A are the rows of Aᵀ
        let at = a.transpose();
        let mut l = Csc { col_ptr: Vec::with_capacity(n + 1), ..Default::default() };
        let mut u = Csc { col_ptr: Vec::with_capacity(n + 1), ..Default::default() };
        let mut pinv = vec![usize::MAX; n];
        let mut x = vec![0.0; n];
        let mut reach = Reach::new(n);
        let mut off_diagonal_pivots = 0;

        for (k, &col) in q.iter().enumerate() {
            l.col_ptr.push(l.values.len());
            u.col_ptr.push(u.values.len());
            let (rows, vals) = at.row(col);
            let col_max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));

            let top = reach.compute(&l, rows, &pinv);
            for &i in &reach.xi[top..] {
                x[i] = 0.0;
            }
            for (&i, &v) in rows.iter().zip(vals) {
                x[i] = v;
            }
            // x = L \ A(:, col) over the reached pattern, in topological order
            for &j in &reach.xi[top..] {
                let jj = pinv[j];
                if jj == usize::MAX {
                    continue;
                }
                let xj = x[j];
                for p in l.col_ptr[jj] + 1..l.col_ptr_end(jj, k) {
                    x[l.row_idx[p]] -= l.values[p] * xj;
                }
            }

            let mut ipiv = usize::MAX;
            let mut amax = -1.0;
            for &i in &reach.xi[top..] {
                if pinv[i] == usize::MAX {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u.row_idx.push(pinv[i]);
                    u.values.push(x[i]);
                }
            }
            if ipiv == usize::MAX || amax <= PIVOT_TOLERANCE * col_max || amax == 0.0 {
                return Err(SolveError::SingularMatrix { column: col, pivot: amax.max(0.0) });
            }
            if pinv[col] == usize::MAX && x[col].abs() >= DIAGONAL_PREFERENCE * amax {
                ipiv = col;
            }
            if ipiv != col {
                off_diagonal_pivots += 1;
            }
            let pivot = x[ipiv];
            u.row_idx.push(k);
            u.values.push(pivot);
            pinv[ipiv] = k;
            l.row_idx.push(ipiv);
            l.values.push(1.0);
            for &i in &reach.xi[top..] {
                if pinv[i] == usize::MAX {
                    l.row_idx.push(i);
                    l.values.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l.col_ptr.push(l.values.len());
        u.col_ptr.push(u.values.len());
        for r in &mut l.row_idx {
            *r = pinv[*r];
        }
        Ok(Self { n, q: q.to_vec(), pinv, l, u, off_diagonal_pivots })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries in `L` and `U`.
    pub fn fill(&self) -> usize {
        self.l.values.len() + self.u.values.len()
    }

    /// Number of columns whose pivot was taken off the diagonal.
    pub fn off_diagonal_pivots(&self) -> usize {
        self.off_diagonal_pivots
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side has wrong length");
        let mut y = vec![0.0; self.n];
        for (i, &v) in b.iter().enumerate() {
            y[self.pinv[i]] = v;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l.col_ptr[j] + 1..self.l.col_ptr[j + 1] {
                    y[self.l.row_idx[p]] -= self.l.values[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u.col_ptr[j + 1] - 1;
            y[j] /= self.u.values[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u.col_ptr[j]..last {
                    y[self.u.row_idx[p]] -= self.u.values[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }
}

impl Csc {
    /// End of column `j` while column `k` is still being built.
    fn col_ptr_end(&self, j: usize, k: usize) -> usize {
        if j < k {
            self.col_ptr[j + 1]
        } else {
            self.values.len()
        }
    }
}

/// Depth-first reachability in the graph of `L`, nonrecursive.
struct Reach {
    xi: Vec<usize>,
    stack: Vec<usize>,
    pstack: Vec<usize>,
    marked: Vec<bool>,
}

impl Reach {
    fn new(n: usize) -> Self {
        Self { xi: vec![0; n], stack: Vec::new(), pstack: Vec::new(), marked: vec![false; n] }
    }

    /// Fills `xi[top..]` with the rows reachable from `rows`, topologically sorted.
    fn compute(&mut self, l: &Csc, rows: &[usize], pinv: &[usize]) -> usize {
        let n = self.xi.len();
        let mut top = n;
        let k = l.col_ptr.len() - 1;
        for &r in rows {
            if self.marked[r] {
                continue;
            }
            self.stack.clear();
            self.pstack.clear();
            self.stack.push(r);
            self.pstack.push(usize::MAX);
            while let Some(&j) = self.stack.last() {
                let head = self.stack.len() - 1;
                let jj = pinv[j];
                if !self.marked[j] {
                    self.marked[j] = true;
                    self.pstack[head] = if jj == usize::MAX { 0 } else { l.col_ptr[jj] + 1 };
                }
                let end = if jj == usize::MAX { 0 } else { l.col_ptr_end(jj, k) };
                let mut descended = false;
                let mut p = self.pstack[head];
                while p < end {
                    let i = l.row_idx[p];
                    p += 1;
                    if !self.marked[i] {
                        self.pstack[head] = p;
                        self.stack.push(i);
                        self.pstack.push(usize::MAX);
                        descended = true;
                        break;
                    }
                }
                if !descended {
                    self.stack.pop();
                    self.pstack.pop();
                    top -= 1;
                    self.xi[top] = j;
                }
            }
        }
        for &j in &self.xi[top..] {
            self.marked[j] = false;
        }
        top
    }
}
