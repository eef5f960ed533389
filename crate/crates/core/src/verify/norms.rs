//! Error norms computed from projected discrete fields.

use rayon::prelude::*;

use super::{ManufacturedCase, VerifyError};
use crate::assembly::{DiscreteSolution, SaddleSystem};
use crate::mesh::{polygon_quadrature, PolyMesh};
use crate::poly::project_l2;
use crate::vemlocal::dof_interpolate_vector;

/// Broken H1 seminorm, L2 velocity and L2 pressure errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub e1: f64,
    pub e0: f64,
    pub ep: f64,
}

/// Quadrature order used for the error integrals.
pub fn error_quadrature_order(k: usize) -> usize {
    2 * k + 4
}

/// Errors of `(Π u_h, p_h)` against the exact solution of `case`.
///
/// The virtual velocity is never evaluated; each cell uses the energy
/// projection of its degrees of freedom.
pub fn error_norms(
    mesh: &PolyMesh,
    system: &SaddleSystem,
    solution: &DiscreteSolution,
    case: &ManufacturedCase,
) -> Result<ErrorNorms, VerifyError> {
    let k = system.dofs.degree();
    let per_cell: Vec<[f64; 3]> = crate::thread_pool().install(|| {
        (0..mesh.n_cells())
            .into_par_iter()
            .map(|cell| {
                let el = &system.elements[cell];
                let ns = el.layout.n_scalar();
                let local = solution.cell_velocity(&system.dofs, mesh, cell);
                let coeffs = [el.project(&local[..ns]), el.project(&local[ns..])];
                let pbasis = el.pressure_basis();
                let q = polygon_quadrature(mesh, cell, error_quadrature_order(k))?;
                let mut acc = [0.0; 3];
                for (&p, &w) in q.points.iter().zip(&q.weights) {
                    let u = case.velocity(p);
                    let gu = case.velocity_gradient(p);
                    for comp in 0..2 {
                        let uh = el.basis.eval_poly(&coeffs[comp], p);
                        let guh = el.basis.eval_poly_gradient(&coeffs[comp], p);
                        acc[0] += w * ((gu[comp][0] - guh[0]).powi(2) + (gu[comp][1] - guh[1]).powi(2));
                        acc[1] += w * (u[comp] - uh).powi(2);
                    }
                    let ph = pbasis.eval_poly(&solution.pressure[cell], p);
                    acc[2] += w * (case.pressure(p) - ph).powi(2);
                }
                Ok(acc)
            })
            .collect::<Result<_, VerifyError>>()
    })?;
    // sequential sum keeps the result independent of the thread count
    let mut tot = [0.0; 3];
    for c in &per_cell {
        for i in 0..3 {
            tot[i] += c[i];
        }
    }
    Ok(ErrorNorms { e1: tot[0].sqrt(), e0: tot[1].sqrt(), ep: tot[2].sqrt() })
}

/// The interpolant of the exact solution as a discrete solution: velocity
/// dofs of `u` and cellwise L2 projections of `p`.
pub fn interpolate_exact(
    mesh: &PolyMesh,
    system: &SaddleSystem,
    case: &ManufacturedCase,
) -> Result<DiscreteSolution, VerifyError> {
    let dofs = &system.dofs;
    let k = dofs.degree();
    let mut velocity = vec![0.0; dofs.n_velocity()];
    let mut pressure = Vec::with_capacity(mesh.n_cells());
    for cell in 0..mesh.n_cells() {
        let local = dof_interpolate_vector(mesh, cell, k, |p| case.velocity(p))
            .map_err(crate::assembly::AssemblyError::from)?;
        for (g, v) in dofs.cell_velocity_dofs(mesh, cell).into_iter().zip(local) {
            velocity[g] = v;
        }
        let el = &system.elements[cell];
        let q = polygon_quadrature(mesh, cell, error_quadrature_order(k))?;
        let c = project_l2(|p| case.pressure(p), &el.pressure_basis(), &q)
            .map_err(|e| crate::assembly::AssemblyError::from(crate::vemlocal::VemError::from(e)))?;
        pressure.push(c);
    }
    Ok(DiscreteSolution {
        degree: k,
        velocity,
        pressure,
        multiplier: 0.0,
        residual: 0.0,
        iterations: 0,
        backend: Default::default(),
    })
}
