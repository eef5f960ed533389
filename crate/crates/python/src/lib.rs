//! Python bindings: mesh generation, Stokes solves against the built-in
//! manufactured solutions, convergence studies and inf-sup estimates.

use std::path::PathBuf;

use ncvem::assembly::{assemble, solve_stokes};
use ncvem::linsolve::SolverConfig;
use ncvem::mesh::io::{read_mesh_json, write_mesh_json, write_mesh_vtk};
use ncvem::mesh::{Domain, PolyMesh};
use ncvem::verify::{
    builtin_cases, case_by_name, convergence_study, error_norms, estimate_infsup, MeshFamily, StudyConfig,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn family(name: &str, seed: u64) -> PyResult<MeshFamily> {
    match name {
        "quad" => Ok(MeshFamily::Quad),
        "voronoi" => Ok(MeshFamily::Voronoi { lloyd_iters: 20, seed }),
        "distorted" => Ok(MeshFamily::Distorted { fraction: 0.2, seed }),
        other => Err(value_err(format!("unknown mesh family '{other}' (expected quad, voronoi or distorted)"))),
    }
}

fn solver(tol: f64) -> PyResult<SolverConfig> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(value_err(format!("tol must be positive (got {tol})")));
    }
    Ok(SolverConfig { tol, ..Default::default() })
}

/// Polygonal mesh of a rectangle.
#[pyclass(name = "Mesh", module = "ncvem_py", frozen)]
pub struct Mesh {
    inner: PolyMesh,
}

#[pymethods]
impl Mesh {
    /// Builds a mesh from vertex coordinates and counter-clockwise cells.
    #[new]
    fn new(vertices: Vec<[f64; 2]>, cells: Vec<Vec<usize>>) -> PyResult<Self> {
        PolyMesh::new(vertices, cells).map(|inner| Self { inner }).map_err(value_err)
    }

    /// Member `size` of a generated family on the unit square.
    #[staticmethod]
    #[pyo3(signature = (family_name, size, seed = 1))]
    fn generate(family_name: &str, size: usize, seed: u64) -> PyResult<Self> {
        let inner = family(family_name, seed)?.build(size, Domain::UNIT_SQUARE).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        read_mesh_json(&path).map(|inner| Self { inner }).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_mesh_json(&self.inner, &path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn save_vtk(&self, path: PathBuf) -> PyResult<()> {
        write_mesh_vtk(&self.inner, &path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    /// Largest cell diameter.
    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 2]> {
        self.inner.vertices().to_vec()
    }

    #[getter]
    fn cells(&self) -> Vec<Vec<usize>> {
        self.inner.cells().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Mesh(cells={}, edges={}, h={:.4e})", self.inner.n_cells(), self.inner.n_edges(), self.inner.h())
    }
}

/// Outcome of one Stokes solve.
#[pyclass(module = "ncvem_py", frozen, get_all)]
pub struct Solution {
    pub k: usize,
    pub n_velocity: usize,
    pub n_pressure: usize,
    pub residual: f64,
    /// Broken H1 velocity error.
    pub e1: f64,
    /// L2 velocity error.
    pub e0: f64,
    /// L2 pressure error.
    pub ep: f64,
    /// Largest entry of the discrete divergence of the velocity.
    pub divergence_defect: f64,
    /// Global velocity degrees of freedom.
    pub velocity: Vec<f64>,
    /// Per-cell pressure coefficients.
    pub pressure: Vec<Vec<f64>>,
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!("Solution(k={}, e1={:.3e}, e0={:.3e}, ep={:.3e})", self.k, self.e1, self.e0, self.ep)
    }
}

/// Names of the built-in manufactured solutions.
#[pyfunction]
fn cases() -> Vec<String> {
    builtin_cases().iter().map(|c| c.name().to_string()).collect()
}

/// Solves the manufactured problem `case` on `mesh` with degree `k`.
#[pyfunction]
#[pyo3(signature = (mesh, case = "trig", k = 1, nu = 1.0, tol = 1e-10))]
fn solve(py: Python<'_>, mesh: &Mesh, case: &str, k: usize, nu: f64, tol: f64) -> PyResult<Solution> {
    if nu.is_nan() || nu <= 0.0 {
        return Err(value_err(format!("nu must be positive (got {nu})")));
    }
    let case = case_by_name(case).map_err(value_err)?.with_nu(nu);
    let config = solver(tol)?;
    py.detach(|| {
        let system = assemble(&mesh.inner, k, nu, |p| case.load(p), |p| case.boundary(p)).map_err(value_err)?;
        let sol = solve_stokes(&system, &config).map_err(value_err)?;
        let e = error_norms(&mesh.inner, &system, &sol, &case).map_err(value_err)?;
        Ok(Solution {
            k,
            n_velocity: system.dofs.n_velocity(),
            n_pressure: system.dofs.n_pressure(),
            residual: sol.residual,
            e1: e.e1,
            e0: e.e0,
            ep: e.ep,
            divergence_defect: sol.divergence_defect(&system),
            velocity: sol.velocity,
            pressure: sol.pressure,
        })
    })
}

/// Convergence study over `sizes` of a mesh family; returns the CSV table.
#[pyfunction]
#[pyo3(signature = (case, k, family_name, sizes, seed = 1, tol = 1e-10))]
fn convergence(
    py: Python<'_>,
    case: &str,
    k: usize,
    family_name: &str,
    sizes: Vec<usize>,
    seed: u64,
    tol: f64,
) -> PyResult<String> {
    let case = case_by_name(case).map_err(value_err)?;
    let fam = family(family_name, seed)?;
    let study = StudyConfig { solver: solver(tol)?, ..Default::default() };
    py.detach(|| convergence_study(&case, k, &fam, &sizes, &study).map(|r| r.to_csv()).map_err(value_err))
}

/// Smallest singular value of the preconditioned divergence operator.
#[pyfunction]
#[pyo3(signature = (mesh, k = 1, nu = 1.0))]
fn infsup(py: Python<'_>, mesh: &Mesh, k: usize, nu: f64) -> PyResult<f64> {
    py.detach(|| estimate_infsup(&mesh.inner, k, nu).map(|e| e.beta).map_err(value_err))
}

#[pymodule]
pub fn ncvem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mesh>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(cases, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(infsup, m)?)?;
    Ok(())
}
