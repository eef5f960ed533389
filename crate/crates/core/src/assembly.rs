//! Global numbering, Dirichlet imposition and the saddle-point system.
//!
//! Unknowns are ordered as `[u (N_u), -p (N_p), λ]`. The velocity block is
//! component-major; within a component all edge moments come first (edge by
//! edge), then all interior moments (cell by cell). Pressures are stored per
//! cell in the cell's scaled monomial basis of degree `k-1`. The last unknown
//! is the Lagrange multiplier of the zero-mean constraint:
//!
//! ```text
//! K = [ A  Bᵀ  0 ]
//!     [ B  0   c ]
//!     [ 0  cᵀ  0 ]
//! ```

use std::path::Path;

use rayon::prelude::*;

use crate::linsolve::{
    csr_from_triplets, solve_symmetric_indefinite, write_matrix_market, Backend, SolveError, SolverConfig,
    SparseMatrixCSR,
};
use crate::mesh::PolyMesh;
use crate::poly::dim_pk_minus;
use crate::vemlocal::{edge_dof_interpolate, LoadForm, LocalVemElement, VemError};
use crate::{Point, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Vem(#[from] VemError),
    #[error("boundary data is not finite on boundary edge {edge} at ({x}, {y})", x = point[0], y = point[1])]
    InconsistentBoundaryData { edge: usize, point: Point },
    #[error("viscosity must be positive and finite (got {0})")]
    InvalidViscosity(f64),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Global numbering of velocity and pressure degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDofMap {
    degree: usize,
    n_edges: usize,
    n_cells: usize,
    /// Interior moments per cell and component, `dim P_{k-2}`.
    n_cell_moments: usize,
    /// Pressure coefficients per cell, `dim P_{k-1}`.
    n_cell_pressure: usize,
    /// Sorted velocity indices of boundary edge moments, both components.
    boundary: Vec<usize>,
}

/// Numbers the degrees of freedom of `mesh` for degree `k`.
pub fn number_dofs(mesh: &PolyMesh, k: usize) -> Result<GlobalDofMap, AssemblyError> {
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(VemError::UnsupportedDegree(k).into());
    }
    let mut map = GlobalDofMap {
        degree: k,
        n_edges: mesh.n_edges(),
        n_cells: mesh.n_cells(),
        n_cell_moments: dim_pk_minus(k, 2),
        n_cell_pressure: dim_pk_minus(k, 1),
        boundary: Vec::new(),
    };
    for comp in 0..2 {
        for &e in mesh.boundary_edges() {
            for j in 0..k {
                map.boundary.push(map.velocity_dof(comp, map.edge_dof(e, j)));
            }
        }
    }
    map.boundary.sort_unstable();
    Ok(map)
}

impl GlobalDofMap {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Scalar unknowns per velocity component.
    pub fn n_scalar(&self) -> usize {
        self.degree * self.n_edges + self.n_cell_moments * self.n_cells
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn n_pressure(&self) -> usize {
        self.n_cell_pressure * self.n_cells
    }

    pub fn n_pressure_per_cell(&self) -> usize {
        self.n_cell_pressure
    }

    /// Size of the full saddle-point system, multiplier included.
    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure() + 1
    }

    /// Scalar index of moment `j` on edge `e`.
    pub fn edge_dof(&self, e: usize, j: usize) -> usize {
        e * self.degree + j
    }

    /// Scalar index of interior moment `beta` of `cell`.
    pub fn cell_dof(&self, cell: usize, beta: usize) -> usize {
        self.degree * self.n_edges + cell * self.n_cell_moments + beta
    }

    pub fn velocity_dof(&self, comp: usize, scalar: usize) -> usize {
        comp * self.n_scalar() + scalar
    }

    /// Global index of pressure coefficient `r` of `cell`, counted from 0.
    pub fn pressure_dof(&self, cell: usize, r: usize) -> usize {
        cell * self.n_cell_pressure + r
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        self.boundary.binary_search(&dof).is_ok()
    }

    /// Global scalar indices of a cell's local scalar dofs.
    pub fn cell_scalar_dofs(&self, mesh: &PolyMesh, cell: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(mesh.cell(cell).len() * self.degree + self.n_cell_moments);
        for &(e, _) in mesh.cell_edges(cell) {
            out.extend((0..self.degree).map(|j| self.edge_dof(e, j)));
        }
        out.extend((0..self.n_cell_moments).map(|b| self.cell_dof(cell, b)));
        out
    }

    /// Global velocity indices of a cell's local velocity dofs, components stacked.
    pub fn cell_velocity_dofs(&self, mesh: &PolyMesh, cell: usize) -> Vec<usize> {
        let s = self.cell_scalar_dofs(mesh, cell);
        let mut out: Vec<usize> = s.iter().map(|&d| self.velocity_dof(0, d)).collect();
        out.extend(s.iter().map(|&d| self.velocity_dof(1, d)));
        out
    }
}

/// Unconstrained operator blocks, kept for diagnostics.
#[derive(Debug, Clone)]
pub struct StokesBlocks {
    /// Velocity stiffness, `N_u × N_u`.
    pub a: SparseMatrixCSR,
    /// Discrete divergence `∫ q div v`, `N_p × N_u`.
    pub b: SparseMatrixCSR,
    /// Pressure integrals `∫_E q`, length `N_p`.
    pub c: Vec<f64>,
    /// Velocity load before boundary elimination.
    pub load: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AssemblyOptions {
    pub load_form: LoadForm,
}

/// Assembled saddle-point system with Dirichlet data eliminated.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub dofs: GlobalDofMap,
    pub nu: f64,
    /// Symmetric system matrix of size `N_u + N_p + 1`.
    pub matrix: SparseMatrixCSR,
    pub rhs: Vec<f64>,
    pub blocks: StokesBlocks,
    /// Prescribed values of the boundary dofs, aligned with [`GlobalDofMap::boundary_dofs`].
    pub boundary_values: Vec<f64>,
    /// Local element data, one per cell.
    pub elements: Vec<LocalVemElement>,
}

impl SaddleSystem {
    /// Writes the system matrix in MatrixMarket format.
    pub fn write_matrix_market(&self, path: &Path) -> Result<(), SolveError> {
        write_matrix_market(&self.matrix, path)
    }
}

/// Assembles the Stokes system with the default load form.
pub fn assemble(
    mesh: &PolyMesh,
    k: usize,
    nu: f64,
    f: impl Fn(Point) -> [f64; 2] + Sync,
    g: impl Fn(Point) -> [f64; 2] + Sync,
) -> Result<SaddleSystem, AssemblyError> {
    assemble_with_options(mesh, k, nu, f, g, AssemblyOptions::default())
}

pub fn assemble_with_options(
    mesh: &PolyMesh,
    k: usize,
    nu: f64,
    f: impl Fn(Point) -> [f64; 2] + Sync,
    g: impl Fn(Point) -> [f64; 2] + Sync,
    options: AssemblyOptions,
) -> Result<SaddleSystem, AssemblyError> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(AssemblyError::InvalidViscosity(nu));
    }
    let dofs = number_dofs(mesh, k)?;
    let (nv, np) = (dofs.n_velocity(), dofs.n_pressure());

    let boundary_values = boundary_moments(mesh, &dofs, &g)?;

    let locals: Vec<(LocalVemElement, Vec<f64>)> = crate::thread_pool().install(|| {
        (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let el = LocalVemElement::new(mesh, c, k, nu)?;
                let load = el.load(mesh, &f, options.load_form)?;
                Ok((el, load))
            })
            .collect::<Result<_, VemError>>()
    })?;

    let mut a_trip = Vec::new();
    let mut b_trip = Vec::new();
    let mut c = vec![0.0; np];
    let mut load = vec![0.0; nv];
    for (cell, (el, fl)) in locals.iter().enumerate() {
        let gdofs = dofs.cell_velocity_dofs(mesh, cell);
        let ns = el.layout.n_scalar();
        for comp in 0..2 {
            for i in 0..ns {
                for j in 0..ns {
                    a_trip.push((gdofs[comp * ns + i], gdofs[comp * ns + j], el.stiffness[(i, j)]));
                }
            }
        }
        for (gi, v) in gdofs.iter().zip(fl) {
            load[*gi] += v;
        }
        let ints = el.pressure_integrals();
        for r in 0..dofs.n_pressure_per_cell() {
            let pr = dofs.pressure_dof(cell, r);
            c[pr] = ints[r];
            for (li, &gi) in gdofs.iter().enumerate() {
                let v = el.divergence[(r, li)];
                if v != 0.0 {
                    b_trip.push((pr, gi, v));
                }
            }
        }
    }
    let a = csr_from_triplets(nv, nv, &a_trip)?;
    let b = csr_from_triplets(np, nv, &b_trip)?;
    let blocks = StokesBlocks { a, b, c, load };
    let (matrix, rhs) = eliminate(&dofs, &blocks, &boundary_values)?;
    let elements = locals.into_iter().map(|(el, _)| el).collect();
    Ok(SaddleSystem { dofs, nu, matrix, rhs, blocks, boundary_values, elements })
}

/// Edge moments of `g` on the boundary dofs, in the order of `boundary_dofs()`.
fn boundary_moments(
    mesh: &PolyMesh,
    dofs: &GlobalDofMap,
    g: &(impl Fn(Point) -> [f64; 2] + Sync),
) -> Result<Vec<f64>, AssemblyError> {
    let k = dofs.degree();
    let mut by_dof = Vec::with_capacity(dofs.boundary_dofs().len());
    for &e in mesh.boundary_edges() {
        let bad = std::cell::Cell::new(None);
        let mut comps = [Vec::new(), Vec::new()];
        for (comp, out) in comps.iter_mut().enumerate() {
            *out = edge_dof_interpolate(mesh, e, k, |p| {
                let v = g(p)[comp];
                if !v.is_finite() && bad.get().is_none() {
                    bad.set(Some(p));
                }
                v
            });
        }
        if let Some(point) = bad.get() {
            return Err(AssemblyError::InconsistentBoundaryData { edge: e, point });
        }
        for (comp, vals) in comps.iter().enumerate() {
            for (j, &v) in vals.iter().enumerate() {
                by_dof.push((dofs.velocity_dof(comp, dofs.edge_dof(e, j)), v));
            }
        }
    }
    by_dof.sort_unstable_by_key(|&(d, _)| d);
    debug_assert!(by_dof.iter().map(|&(d, _)| d).eq(dofs.boundary_dofs().iter().copied()));
    Ok(by_dof.into_iter().map(|(_, v)| v).collect())
}

/// Builds `K` and the right-hand side, eliminating the boundary dofs
/// symmetrically: their rows and columns are replaced by `A_ii` on the
/// diagonal and the known column contributions move to the right-hand side.
fn eliminate(
    dofs: &GlobalDofMap,
    blocks: &StokesBlocks,
    values: &[f64],
) -> Result<(SparseMatrixCSR, Vec<f64>), AssemblyError> {
    let (nv, np) = (dofs.n_velocity(), dofs.n_pressure());
    let n = dofs.n_total();
    let mut fixed: Vec<Option<f64>> = vec![None; nv];
    for (&d, &v) in dofs.boundary_dofs().iter().zip(values) {
        fixed[d] = Some(v);
    }
    let mut rhs = vec![0.0; n];
    rhs[..nv].copy_from_slice(&blocks.load);
    let mut trip = Vec::with_capacity(blocks.a.nnz() + 2 * blocks.b.nnz() + 2 * np + nv);

    for i in 0..nv {
        let (cols, vals) = blocks.a.row(i);
        match fixed[i] {
            Some(_) => {
                let d = blocks.a.get(i, i).abs();
                trip.push((i, i, if d > 0.0 { d } else { 1.0 }));
            }
            None => {
                for (&j, &v) in cols.iter().zip(vals) {
                    match fixed[j] {
                        Some(gj) => rhs[i] -= v * gj,
                        None => trip.push((i, j, v)),
                    }
                }
            }
        }
    }
    for (&d, &v) in dofs.boundary_dofs().iter().zip(values) {
        let diag = blocks.a.get(d, d).abs();
        rhs[d] = if diag > 0.0 { diag } else { 1.0 } * v;
    }
    for r in 0..np {
        let (cols, vals) = blocks.b.row(r);
        for (&j, &v) in cols.iter().zip(vals) {
            match fixed[j] {
                Some(gj) => rhs[nv + r] -= v * gj,
                None => {
                    trip.push((nv + r, j, v));
                    trip.push((j, nv + r, v));
                }
            }
        }
        trip.push((nv + r, n - 1, blocks.c[r]));
        trip.push((n - 1, nv + r, blocks.c[r]));
    }
    Ok((csr_from_triplets(n, n, &trip)?, rhs))
}

/// Discrete velocity and pressure.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub degree: usize,
    /// Global velocity dofs, length `N_u`.
    pub velocity: Vec<f64>,
    /// Physical pressure coefficients per cell, scaled monomials of degree `k-1`.
    pub pressure: Vec<Vec<f64>>,
    /// Lagrange multiplier of the zero-mean constraint.
    pub multiplier: f64,
    /// Relative residual of the linear solve.
    pub residual: f64,
    pub iterations: usize,
    pub backend: Backend,
}

impl DiscreteSolution {
    /// Local velocity dofs of one cell, components stacked.
    pub fn cell_velocity(&self, dofs: &GlobalDofMap, mesh: &PolyMesh, cell: usize) -> Vec<f64> {
        dofs.cell_velocity_dofs(mesh, cell).iter().map(|&d| self.velocity[d]).collect()
    }

    /// `Σ_E ∫_E p_h`.
    pub fn pressure_integral(&self, system: &SaddleSystem) -> f64 {
        self.pressure
            .iter()
            .enumerate()
            .flat_map(|(cell, p)| {
                p.iter().enumerate().map(move |(r, v)| v * system.blocks.c[system.dofs.pressure_dof(cell, r)])
            })
            .sum()
    }

    /// `‖B u_h‖∞`: the largest pressure moment of the discrete divergence.
    pub fn divergence_defect(&self, system: &SaddleSystem) -> f64 {
        system
            .blocks
            .b
            .matvec(&self.velocity)
            .expect("velocity has N_u entries")
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Solves the assembled system and recovers the physical pressure.
pub fn solve_stokes(system: &SaddleSystem, config: &SolverConfig) -> Result<DiscreteSolution, AssemblyError> {
    let sol = solve_symmetric_indefinite(&system.matrix, &system.rhs, config)?;
    let dofs = &system.dofs;
    let (nv, np) = (dofs.n_velocity(), dofs.n_pressure());
    let mut velocity = sol.x[..nv].to_vec();
    // boundary dofs are prescribed exactly
    for (&d, &v) in dofs.boundary_dofs().iter().zip(&system.boundary_values) {
        velocity[d] = v;
    }
    let m = dofs.n_pressure_per_cell();
    let pressure = sol.x[nv..nv + np].chunks(m).map(|c| c.iter().map(|v| -v).collect()).collect();
    Ok(DiscreteSolution {
        degree: dofs.degree(),
        velocity,
        pressure,
        multiplier: sol.x[nv + np],
        residual: sol.residual,
        iterations: sol.iterations,
        backend: sol.backend,
    })
}
