//! Sparse linear algebra for symmetric indefinite saddle-point systems.
//!
//! [`solve_symmetric_indefinite`] dispatches to a sparse direct LU on a
//! nested-dissection ordering for systems up to
//! [`SolverConfig::direct_threshold`] unknowns, and to diagonally
//! preconditioned MINRES above it. Both report the true relative residual.

mod csr;
mod lu;
mod matrix_market;
mod minres;
mod ordering;
mod svd;

pub use csr::{csr_from_triplets, SparseMatrixCSR};
pub use lu::{SparseLu, PIVOT_TOLERANCE};
pub use matrix_market::{from_matrix_market, read_matrix_market, to_matrix_market, write_matrix_market};
pub use minres::{minres, saddle_point_diagonal, MinresOutcome};
pub use ordering::nested_dissection;
pub use svd::{min_singular_value_dense, singular_values_dense, DENSE_SIZE_LIMIT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("entry ({row}, {col}) is outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange { row: usize, col: usize, nrows: usize, ncols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("matrix is not symmetric: |K({row},{col}) - K({col},{row})| = {defect:e}")]
    NotSymmetric { row: usize, col: usize, defect: f64 },
    #[error("matrix is singular to working precision (pivot {pivot:e} in column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("tolerance not reached after {iterations} iterations (relative residual {residual:e})")]
    ToleranceNotReached { iterations: usize, residual: f64, best: Vec<f64> },
    #[error("iterative solver broke down after {iterations} iterations: {reason}")]
    SolverBreakdown { iterations: usize, reason: String },
    #[error("dense routine limited to {limit} rows and columns, got {rows}x{cols}")]
    SizeLimitExceeded { rows: usize, cols: usize, limit: usize },
    #[error("MatrixMarket: {0}")]
    MatrixMarket(String),
}

/// Which backend [`solve_symmetric_indefinite`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Direct up to `direct_threshold` unknowns, MINRES above.
    #[default]
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Required relative residual `‖K x - b‖ / ‖b‖`.
    pub tol: f64,
    /// Largest system solved directly under [`Backend::Auto`].
    pub direct_threshold: usize,
    /// MINRES iteration budget.
    pub max_iterations: usize,
    pub backend: Backend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, direct_threshold: 50_000, max_iterations: 200_000, backend: Backend::Auto }
    }
}

/// Result of a linear solve.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    /// True relative residual `‖K x - b‖ / ‖b‖`.
    pub residual: f64,
    /// MINRES iterations, or refinement steps for the direct backend.
    pub iterations: usize,
    pub backend: Backend,
}

/// Number of entries sampled by the symmetry precondition.
const SYMMETRY_SAMPLES: usize = 4096;

/// Checks `|K_ij - K_ji| <= 1e-12 max|K|` on an evenly spaced sample of stored entries.
pub fn check_symmetry_sampled(k: &SparseMatrixCSR) -> Result<(), SolveError> {
    if k.nrows() != k.ncols() {
        return Err(SolveError::DimensionMismatch { expected: k.nrows(), got: k.ncols() });
    }
    let tol = 1e-12 * k.max_abs();
    let stride = (k.nnz() / SYMMETRY_SAMPLES).max(1);
    let rp = k.row_ptr();
    let mut row = 0;
    for p in (0..k.nnz()).step_by(stride) {
        while rp[row + 1] <= p {
            row += 1;
        }
        let col = k.col_indices()[p];
        let defect = (k.values()[p] - k.get(col, row)).abs();
        if defect > tol {
            return Err(SolveError::NotSymmetric { row, col, defect });
        }
    }
    Ok(())
}

fn relative_residual(k: &SparseMatrixCSR, x: &[f64], b: &[f64], bnorm: f64) -> (Vec<f64>, f64) {
    let mut r = vec![0.0; b.len()];
    k.matvec_into(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    (r, rn / bnorm)
}

/// Solves the symmetric (possibly indefinite) system `K x = rhs`.
pub fn solve_symmetric_indefinite(
    k: &SparseMatrixCSR,
    rhs: &[f64],
    config: &SolverConfig,
) -> Result<LinearSolution, SolveError> {
    let n = k.nrows();
    check_symmetry_sampled(k)?;
    if rhs.len() != n {
        return Err(SolveError::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let direct = match config.backend {
        Backend::Direct => true,
        Backend::Iterative => false,
        Backend::Auto => n <= config.direct_threshold,
    };
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if direct {
        let perm = nested_dissection(k);
        let lu = SparseLu::factor(k, &perm)?;
        log::debug!("sparse LU: n = {n}, nnz(K) = {}, nnz(L+U) = {}", k.nnz(), lu.fill());
        if bnorm == 0.0 {
            return Ok(LinearSolution { x: vec![0.0; n], residual: 0.0, iterations: 0, backend: Backend::Direct });
        }
        let mut x = lu.solve(rhs);
        let (mut r, mut res) = relative_residual(k, &x, rhs, bnorm);
        let mut steps = 0;
        // iterative refinement while it keeps paying off; a small residual
        // can still hide a large error in ill-conditioned systems
        while steps < 3 && res > 0.0 {
            let dx = lu.solve(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let (r2, res2) = relative_residual(k, &cand, rhs, bnorm);
            steps += 1;
            if res2 >= res {
                break;
            }
            (x, r, res) = (cand, r2, res2);
        }
        if res > config.tol {
            return Err(SolveError::ToleranceNotReached { iterations: steps, residual: res, best: x });
        }
        Ok(LinearSolution { x, residual: res, iterations: steps, backend: Backend::Direct })
    } else {
        let m = saddle_point_diagonal(k);
        let out = minres(k, rhs, &m, config.tol, config.max_iterations)?;
        log::debug!("MINRES: n = {n}, {} iterations, residual {:.3e}", out.iterations, out.residual);
        Ok(LinearSolution { x: out.x, residual: out.residual, iterations: out.iterations, backend: Backend::Iterative })
    }
}
