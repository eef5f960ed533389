//! Preconditioned MINRES for symmetric indefinite systems.

use super::{SolveError, SparseMatrixCSR};

/// Outcome of a MINRES run.
#[derive(Debug, Clone)]
pub struct MinresOutcome {
    pub x: Vec<f64>,
    /// True relative residual `‖b - A x‖ / ‖b‖`.
    pub residual: f64,
    pub iterations: usize,
}

/// Positive diagonal preconditioner for a saddle-point matrix.
///
/// Rows with a nonzero diagonal use `|A_ii|`. A row with zero diagonal gets
/// the Schur-complement surrogate `Σ_j A_ij² / d_j` over neighbours `j` whose
/// weight `d_j` is already known; repeated passes reach the constraint rows
/// that only couple to other zero-diagonal rows.
pub fn saddle_point_diagonal(a: &SparseMatrixCSR) -> Vec<f64> {
    let n = a.nrows();
    let mut d: Vec<Option<f64>> = a.diagonal().iter().map(|&v| (v != 0.0).then(|| v.abs())).collect();
    loop {
        let mut updates = Vec::new();
        for i in 0..n {
            if d[i].is_some() {
                continue;
            }
            let (cols, vals) = a.row(i);
            let s: f64 = cols.iter().zip(vals).filter_map(|(&j, &v)| d[j].map(|dj| v * v / dj)).sum();
            if s > 0.0 {
                updates.push((i, s));
            }
        }
        if updates.is_empty() {
            break;
        }
        for (i, s) in updates {
            d[i] = Some(s);
        }
    }
    d.into_iter().map(|v| v.unwrap_or(1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` by MINRES with diagonal preconditioner `m` (entries > 0).
///
/// The recurrence residual is only an estimate, so each cycle ends with a
/// true residual check and restarts from the current iterate if needed.
pub fn minres(
    a: &SparseMatrixCSR,
    b: &[f64],
    m: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<MinresOutcome, SolveError> {
    let n = a.nrows();
    if b.len() != n || m.len() != n {
        return Err(SolveError::DimensionMismatch { expected: n, got: b.len().min(m.len()) });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(MinresOutcome { x: vec![0.0; n], residual: 0.0, iterations: 0 });
    }
    let mut x = vec![0.0; n];
    let mut best = (f64::INFINITY, x.clone());
    let mut iterations = 0;
    let mut ax = vec![0.0; n];
    let mut stagnant_cycles = 0;
    while iterations < max_iterations {
        a.matvec_into(&x, &mut ax);
        let r0: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rel = norm(&r0) / bnorm;
        if rel < best.0 {
            if rel > 0.5 * best.0 {
                stagnant_cycles += 1;
            } else {
                stagnant_cycles = 0;
            }
            best = (rel, x.clone());
        } else {
            stagnant_cycles += 1;
        }
        if rel <= tol {
            return Ok(MinresOutcome { x, residual: rel, iterations });
        }
        if stagnant_cycles >= 5 {
            break;
        }
        let used = cycle(a, &r0, m, &mut x, tol * bnorm, max_iterations - iterations)?;
        iterations += used;
    }
    // final check of the last cycle's iterate
    a.matvec_into(&x, &mut ax);
    let rel = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum::<f64>().sqrt() / bnorm;
    if rel < best.0 {
        best = (rel, x);
    }
    if best.0 <= tol {
        return Ok(MinresOutcome { x: best.1, residual: best.0, iterations });
    }
    Err(SolveError::ToleranceNotReached { iterations, residual: best.0, best: best.1 })
}

/// One MINRES cycle for the correction `A e = r0`, accumulated into `x`.
/// Returns the number of iterations used.
fn cycle(
    a: &SparseMatrixCSR,
    r0: &[f64],
    m: &[f64],
    x: &mut [f64],
    abs_tol: f64,
    budget: usize,
) -> Result<usize, SolveError> {
    let n = r0.len();
    let mut r1 = r0.to_vec();
    let mut r2 = r0.to_vec();
    let mut y: Vec<f64> = r0.iter().zip(m).map(|(r, d)| r / d).collect();
    let beta1 = dot(&r1, &y).sqrt();
    if beta1 == 0.0 {
        return Ok(0);
    }
    // M-norm and 2-norm of the residual differ by at most this factor
    let mmax = m.iter().fold(0.0f64, |s, &v| s.max(v));
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    for itn in 1..=budget {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.matvec_into(&v, &mut y);
        if itn >= 2 {
            let f = beta / oldb;
            for (yi, ri) in y.iter_mut().zip(&r1) {
                *yi -= f * ri;
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for (yi, ri) in y.iter_mut().zip(&r2) {
            *yi -= f * ri;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        for (yi, (ri, d)) in y.iter_mut().zip(r2.iter().zip(m)) {
            *yi = ri / d;
        }
        oldb = beta;
        let b2 = dot(&r2, &y);
        if b2 < 0.0 || !b2.is_finite() {
            return Err(SolveError::SolverBreakdown {
                iterations: itn,
                reason: "preconditioner is not positive".into(),
            });
        }
        beta = b2.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        // phibar bounds ‖r‖_{M⁻¹}; scale to a 2-norm bound
        if phibar * mmax.sqrt() <= 0.5 * abs_tol || beta == 0.0 {
            return Ok(itn);
        }
    }
    Ok(budget)
}
