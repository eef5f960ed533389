//! Legacy VTK export of projected discrete fields.

use std::fmt::Write as _;
use std::path::Path;

use super::VerifyError;
use crate::assembly::{DiscreteSolution, SaddleSystem};
use crate::mesh::PolyMesh;

/// POLYDATA with one copy of each cell's vertices, so the discontinuous
/// fields `Π u_h` and `p_h` are sampled per cell without averaging.
pub fn solution_to_vtk(mesh: &PolyMesh, system: &SaddleSystem, solution: &DiscreteSolution) -> String {
    let n_points: usize = mesh.cells().iter().map(Vec::len).sum();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nncvem projected Stokes solution\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(s, "POINTS {n_points} double");
    for cell in 0..mesh.n_cells() {
        for p in mesh.cell_points(cell) {
            let _ = writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]);
        }
    }
    let _ = writeln!(s, "POLYGONS {} {}", mesh.n_cells(), n_points + mesh.n_cells());
    let mut next = 0;
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.len());
        for _ in c {
            let _ = write!(s, " {next}");
            next += 1;
        }
        s.push('\n');
    }

    let mut velocity = String::new();
    let mut pressure = String::new();
    let mut cell_pressure = String::new();
    for cell in 0..mesh.n_cells() {
        let el = &system.elements[cell];
        let ns = el.layout.n_scalar();
        let local = solution.cell_velocity(&system.dofs, mesh, cell);
        let cx = el.project(&local[..ns]);
        let cy = el.project(&local[ns..]);
        let pb = el.pressure_basis();
        for p in mesh.cell_points(cell) {
            let _ = writeln!(velocity, "{:.17e} {:.17e} 0", el.basis.eval_poly(&cx, p), el.basis.eval_poly(&cy, p));
            let _ = writeln!(pressure, "{:.17e}", pb.eval_poly(&solution.pressure[cell], p));
        }
        let mean =
            solution.pressure[cell].iter().zip(&el.pressure_integrals()).map(|(a, b)| a * b).sum::<f64>() / el.area;
        let _ = writeln!(cell_pressure, "{mean:.17e}");
    }
    let _ = writeln!(s, "POINT_DATA {n_points}");
    s.push_str("VECTORS velocity double\n");
    s.push_str(&velocity);
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    s.push_str(&pressure);
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
    s.push_str("SCALARS pressure_mean double 1\nLOOKUP_TABLE default\n");
    s.push_str(&cell_pressure);
    s
}

pub fn write_solution_vtk(
    mesh: &PolyMesh,
    system: &SaddleSystem,
    solution: &DiscreteSolution,
    path: &Path,
) -> Result<(), VerifyError> {
    std::fs::write(path, solution_to_vtk(mesh, system, solution))
        .map_err(|e| VerifyError::Io { path: path.display().to_string(), reason: e.to_string() })
}
