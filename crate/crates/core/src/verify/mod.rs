//! Manufactured solutions, error norms, convergence studies and inf-sup estimates.

mod cases;
mod infsup;
mod norms;
mod output;
mod study;

pub use cases::{builtin_cases, case_by_name, ManufacturedCase};
pub use infsup::{estimate_infsup, InfSupEstimate};
pub use norms::{error_norms, error_quadrature_order, interpolate_exact, ErrorNorms};
pub use output::{solution_to_vtk, write_solution_vtk};
pub use study::{
    convergence_study, convergence_study_on, observed_rate, ConvergenceReport, LevelResult, MeshFamily, StudyConfig,
    MIN_LEVELS,
};

use crate::assembly::AssemblyError;
use crate::linsolve::SolveError;
use crate::mesh::MeshError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown manufactured case '{0}' (available: poly-1 ... poly-5, trig)")]
    UnknownCase(String),
    #[error("a convergence study needs at least {MIN_LEVELS} levels (got {0})")]
    TooFewLevels(usize),
    #[error("mesh size must decrease across levels (level {level}: h = {h:e}, previous {previous:e})")]
    NonDecreasingH { level: usize, h: f64, previous: f64 },
    #[error("dense inf-sup estimate limited to {limit} unknowns (mesh has {dofs})")]
    SizeLimitExceeded { dofs: usize, limit: usize },
    #[error("singular operator in inf-sup estimate: {0}")]
    SingularOperator(String),
    #[error("cannot write {path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, solve_stokes};
    use crate::linsolve::SolverConfig;
    use crate::mesh::{gen_quad_grid, Domain};

    fn quad(n: usize) -> crate::mesh::PolyMesh {
        gen_quad_grid(n, n, Domain::UNIT_SQUARE).unwrap()
    }

    #[test]
    fn interpolant_of_polynomial_has_zero_error() {
        let m = quad(3);
        for k in 1..=3 {
            let case = ManufacturedCase::poly(k).unwrap();
            let s = assemble(&m, k, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
            let sol = interpolate_exact(&m, &s, &case).unwrap();
            let e = error_norms(&m, &s, &sol, &case).unwrap();
            assert!(e.e1 < 1e-10 && e.e0 < 1e-10 && e.ep < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn zero_solution_against_zero_exact() {
        // poly-1 has p = 0; a zero velocity field is compared against u = (y, x)
        let m = quad(2);
        let case = ManufacturedCase::poly(1).unwrap();
        let s = assemble(&m, 1, 1.0, |_| [0.0; 2], |_| [0.0; 2]).unwrap();
        let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
        let e = error_norms(&m, &s, &sol, &case).unwrap();
        assert_eq!(e.ep, 0.0);
        // ∫|∇u|² = 2 and ∫|u|² = 2/3 on the unit square
        assert!((e.e1 - 2f64.sqrt()).abs() < 1e-12);
        assert!((e.e0 - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn patch_test_quad_k2() {
        let m = quad(4);
        let case = ManufacturedCase::poly(2).unwrap();
        let s = assemble(&m, 2, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
        let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
        let e = error_norms(&m, &s, &sol, &case).unwrap();
        assert!(e.e1 < 1e-9 && e.e0 < 1e-9 && e.ep < 1e-9, "{e:?}");
    }

    #[test]
    fn trig_rate_on_8_and_16() {
        let case = ManufacturedCase::trig();
        let mut prev = None;
        for n in [8, 16] {
            let m = quad(n);
            let s = assemble(&m, 1, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
            let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
            assert!(sol.residual <= 1e-10);
            let e = error_norms(&m, &s, &sol, &case).unwrap();
            assert!(e.e1.is_finite() && e.e0.is_finite() && e.ep.is_finite());
            if let Some(p) = prev {
                let ratio: f64 = p / e.e1;
                assert!((ratio - 2.0).abs() < 0.3, "e1 ratio {ratio}");
            }
            prev = Some(e.e1);
        }
    }

    #[test]
    fn study_needs_three_levels_and_writes_csv() {
        let case = ManufacturedCase::poly(1).unwrap();
        let cfg = StudyConfig::default();
        assert!(matches!(
            convergence_study(&case, 1, &MeshFamily::Quad, &[2, 4], &cfg),
            Err(VerifyError::TooFewLevels(2))
        ));
        let r = convergence_study(&case, 1, &MeshFamily::Quad, &[2, 4, 8], &cfg).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ConvergenceReport::CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",,,"));
        assert_eq!(lines[2].split(',').count(), 10);
        for l in &r.levels {
            assert!(l.errors.e1 < 1e-9 && l.errors.e0 < 1e-9 && l.errors.ep < 1e-9);
        }
    }

    #[test]
    fn infsup_on_small_grids() {
        let est = estimate_infsup(&quad(2), 1, 1.0).unwrap();
        assert!(est.beta > 0.05, "{est:?}");
        assert!(est.beta_with_constant < 1e-10, "{est:?}");
        assert!(matches!(estimate_infsup(&quad(40), 1, 1.0), Err(VerifyError::SizeLimitExceeded { .. })));
    }

    #[test]
    fn vtk_output_has_projected_fields() {
        let m = quad(2);
        let case = ManufacturedCase::poly(1).unwrap();
        let s = assemble(&m, 1, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
        let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
        let v = solution_to_vtk(&m, &s, &sol);
        assert!(v.contains("POINTS 16 double"));
        assert!(v.contains("VECTORS velocity double"));
        assert!(v.contains("CELL_DATA 4"));
    }
}
