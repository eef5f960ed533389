//! Numerical inf-sup constant of the discrete Stokes pair.

use super::VerifyError;
use crate::assembly::assemble;
use crate::dense::DMat;
use crate::linsolve::{singular_values_dense, DENSE_SIZE_LIMIT};
use crate::mesh::PolyMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSupEstimate {
    /// Smallest singular value with the constant pressure removed.
    pub beta: f64,
    /// Smallest singular value over all pressures; zero up to rounding,
    /// since constants pair trivially with zero-boundary velocities.
    pub beta_with_constant: f64,
    pub n_velocity_free: usize,
    pub n_pressure: usize,
}

/// Smallest singular value of `M_p^{-1/2} B A_0^{-1/2}` on the zero-mean pressures.
///
/// `A_0` is the velocity stiffness restricted to the interior dofs and
/// `M_p` the pressure mass matrix; both are factored densely.
pub fn estimate_infsup(mesh: &PolyMesh, k: usize, nu: f64) -> Result<InfSupEstimate, VerifyError> {
    let dofs = crate::assembly::number_dofs(mesh, k)?;
    let free: Vec<usize> = (0..dofs.n_velocity()).filter(|&d| !dofs.is_boundary_dof(d)).collect();
    let np = dofs.n_pressure();
    if free.len() + np > DENSE_SIZE_LIMIT {
        return Err(VerifyError::SizeLimitExceeded { dofs: free.len() + np, limit: DENSE_SIZE_LIMIT });
    }
    let system = assemble(mesh, k, nu, |_| [0.0; 2], |_| [0.0; 2])?;
    let a = system.blocks.a.to_dense();
    let b = system.blocks.b.to_dense();
    let all_p: Vec<usize> = (0..np).collect();
    let a0 = a.select(&free, &free);
    let b0 = b.select(&all_p, &free);

    let mut mp = DMat::zeros(np, np);
    let m = dofs.n_pressure_per_cell();
    for (cell, el) in system.elements.iter().enumerate() {
        for r in 0..m {
            for s in 0..m {
                mp[(dofs.pressure_dof(cell, r), dofs.pressure_dof(cell, s))] = el.pressure_mass[(r, s)];
            }
        }
    }
    let la = a0.cholesky().map_err(|e| VerifyError::SingularOperator(format!("velocity stiffness: {e}")))?;
    let lm = mp.cholesky().map_err(|e| VerifyError::SingularOperator(format!("pressure mass: {e}")))?;

    // T = L_M⁻¹ B₀ L_A⁻ᵀ, built row by row of B₀ then column by column
    let nf = free.len();
    let y: Vec<Vec<f64>> = (0..np).map(|r| la.forward(b0.row(r))).collect();
    let mut t = DMat::zeros(np, nf);
    for j in 0..nf {
        let col: Vec<f64> = y.iter().map(|yr| yr[j]).collect();
        for (r, v) in lm.forward(&col).into_iter().enumerate() {
            t[(r, j)] = v;
        }
    }
    let beta_with_constant = singular_values_dense(&t)?.last().copied().unwrap_or(0.0);

    // constant pressure in the transformed variables: w = L_Mᵀ 1
    let mut ones = vec![0.0; np];
    for cell in 0..mesh.n_cells() {
        ones[dofs.pressure_dof(cell, 0)] = 1.0;
    }
    let lmat = lm.factor();
    let w: Vec<f64> = (0..np).map(|i| (i..np).map(|r| lmat[(r, i)] * ones[r]).sum()).collect();
    let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    // Householder reflection mapping w to a multiple of e₀; rows 1.. span its complement
    let alpha = if w[0] >= 0.0 { -wn } else { wn };
    let mut u: Vec<f64> = w.clone();
    u[0] -= alpha;
    let uu: f64 = u.iter().map(|v| v * v).sum();
    let mut reduced = DMat::zeros(np - 1, nf);
    for j in 0..nf {
        let ut: f64 = (0..np).map(|r| u[r] * t[(r, j)]).sum();
        let f = 2.0 * ut / uu;
        for r in 1..np {
            reduced[(r - 1, j)] = t[(r, j)] - f * u[r];
        }
    }
    let beta = singular_values_dense(&reduced)?.last().copied().unwrap_or(0.0);
    Ok(InfSupEstimate { beta, beta_with_constant, n_velocity_free: nf, n_pressure: np })
}
