//! Global invariants of the assembled Stokes system on small meshes.

use ncvem::assembly::{assemble, solve_stokes};
use ncvem::dense::DMat;
use ncvem::linsolve::{singular_values_dense, SolverConfig};
use ncvem::mesh::{Domain, PolyMesh};
use ncvem::verify::{ManufacturedCase, MeshFamily};

fn meshes() -> Vec<(String, PolyMesh)> {
    [
        (MeshFamily::Quad, 2),
        (MeshFamily::Quad, 4),
        (MeshFamily::DEFAULT_VORONOI, 16),
        (MeshFamily::DEFAULT_DISTORTED, 3),
    ]
    .into_iter()
    .map(|(f, n)| (format!("{} {n}", f.name()), f.build(n, Domain::UNIT_SQUARE).unwrap()))
    .collect()
}

fn free_columns(b: &DMat, mesh: &PolyMesh, k: usize) -> (DMat, Vec<usize>) {
    let dofs = ncvem::assembly::number_dofs(mesh, k).unwrap();
    let free: Vec<usize> = (0..dofs.n_velocity()).filter(|&d| !dofs.is_boundary_dof(d)).collect();
    let rows: Vec<usize> = (0..b.nrows()).collect();
    (b.select(&rows, &free), free)
}

#[test]
fn divergence_augmented_with_mean_has_full_row_rank() {
    for (name, mesh) in meshes() {
        for k in 1..=3 {
            let s = assemble(&mesh, k, 1.0, |_| [0.0; 2], |_| [0.0; 2]).unwrap();
            let (b0, free) = free_columns(&s.blocks.b.to_dense(), &mesh, k);
            let np = b0.nrows();
            let aug = DMat::from_fn(np, free.len() + 1, |i, j| if j < free.len() { b0[(i, j)] } else { s.blocks.c[i] });
            // singular values of the wide matrix through its transpose
            let sv = singular_values_dense(&DMat::from_fn(aug.ncols(), np, |i, j| aug[(j, i)])).unwrap();
            let smin = *sv.last().unwrap();
            assert!(smin > 1e-10, "{name} k={k}: smallest singular value {smin:.3e}");

            // without the mean constraint the constant pressure is in the kernel
            let sv = singular_values_dense(&DMat::from_fn(free.len(), np, |i, j| b0[(j, i)])).unwrap();
            assert!(*sv.last().unwrap() < 1e-10 * sv[0], "{name} k={k}");
        }
    }
}

#[test]
fn assembly_is_deterministic() {
    let case = ManufacturedCase::trig();
    for (name, mesh) in meshes() {
        let a = assemble(&mesh, 2, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
        let b = assemble(&mesh, 2, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
        assert_eq!(a.matrix, b.matrix, "{name}");
        assert_eq!(a.rhs, b.rhs, "{name}");
    }
}

#[test]
fn solved_pressure_has_zero_mean() {
    for case in [ManufacturedCase::trig(), ManufacturedCase::poly(3).unwrap()] {
        for (name, mesh) in meshes() {
            let s = assemble(&mesh, 3, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
            let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
            assert!(sol.residual <= 1e-10, "{name}");
            assert!(sol.pressure_integral(&s).abs() <= 1e-10, "{name}: {}", sol.pressure_integral(&s));
        }
    }
}
