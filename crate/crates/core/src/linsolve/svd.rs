//! Singular values of small dense matrices by one-sided Jacobi rotations.

use super::SolveError;
use crate::dense::DMat;

/// Largest dimension accepted by the dense singular value routines.
pub const DENSE_SIZE_LIMIT: usize = 2000;

const MAX_SWEEPS: usize = 80;

/// All singular values of `m`, in decreasing order.
///
/// One-sided Jacobi orthogonalizes the columns of the taller orientation;
/// it computes small singular values to high relative accuracy.
pub fn singular_values_dense(m: &DMat) -> Result<Vec<f64>, SolveError> {
    let (r, c) = (m.nrows(), m.ncols());
    if r.max(c) > DENSE_SIZE_LIMIT {
        return Err(SolveError::SizeLimitExceeded { rows: r, cols: c, limit: DENSE_SIZE_LIMIT });
    }
    if r == 0 || c == 0 {
        return Ok(Vec::new());
    }
    // columns of the tall orientation, stored contiguously
    let mut cols: Vec<Vec<f64>> =
        if r >= c { (0..c).map(|j| m.column(j)).collect() } else { (0..r).map(|i| m.row(i).to_vec()).collect() };
    let n = cols.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(j);
                for (a, b) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = cs * x - sn * y;
                    *b = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Smallest singular value of `m` (of the `min(rows, cols)` values).
pub fn min_singular_value_dense(m: &DMat) -> Result<f64, SolveError> {
    Ok(singular_values_dense(m)?.last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(min_singular_value_dense(&DMat::identity(5)).unwrap(), 1.0);
        let d = DMat::diag(&[3.0, 2.0, 0.5]);
        assert!((min_singular_value_dense(&d).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wide_matrix_uses_rows() {
        let m = DMat::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]);
        assert_eq!(singular_values_dense(&m).unwrap(), vec![4.0, 3.0]);
    }

    #[test]
    fn rank_deficient_matrix() {
        let m = DMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        let sv = singular_values_dense(&m).unwrap();
        assert!((sv[0] - 70.0f64.sqrt()).abs() < 1e-13);
        assert!(sv[1] < 1e-14);
    }

    #[test]
    fn size_limit() {
        let m = DMat::zeros(DENSE_SIZE_LIMIT + 1, 1);
        assert!(matches!(min_singular_value_dense(&m), Err(SolveError::SizeLimitExceeded { .. })));
    }
}
