//! Convergence studies over mesh families.

use std::fmt::Write as _;
use std::path::Path;

use super::{error_norms, ErrorNorms, ManufacturedCase, VerifyError};
use crate::assembly::{assemble_with_options, solve_stokes, AssemblyOptions};
use crate::linsolve::SolverConfig;
use crate::mesh::{gen_distorted_quads, gen_quad_grid, gen_voronoi_polygonal, Domain, MeshError, PolyMesh};

/// A family of meshes indexed by a size parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    /// `n × n` squares.
    Quad,
    /// `n` Lloyd-relaxed Voronoi cells.
    Voronoi { lloyd_iters: usize, seed: u64 },
    /// `n × n` quads with interior vertices moved by up to `fraction` of a cell width.
    Distorted { fraction: f64, seed: u64 },
}

impl MeshFamily {
    pub const DEFAULT_VORONOI: Self = Self::Voronoi { lloyd_iters: 20, seed: 1 };
    pub const DEFAULT_DISTORTED: Self = Self::Distorted { fraction: 0.2, seed: 1 };

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quad => "quad",
            Self::Voronoi { .. } => "voronoi",
            Self::Distorted { .. } => "distorted",
        }
    }

    pub fn build(&self, size: usize, domain: Domain) -> Result<PolyMesh, MeshError> {
        match *self {
            Self::Quad => gen_quad_grid(size, size, domain),
            Self::Voronoi { lloyd_iters, seed } => gen_voronoi_polygonal(size, lloyd_iters, seed, domain),
            Self::Distorted { fraction, seed } => {
                gen_distorted_quads(size, size, fraction / size.max(1) as f64, seed, domain)
            }
        }
    }

    /// Sizes of `levels` successive refinements, halving `h` each time.
    pub fn refinement_sizes(&self, base: usize, levels: usize) -> Vec<usize> {
        let factor = match self {
            Self::Voronoi { .. } => 4,
            _ => 2,
        };
        std::iter::successors(Some(base), |s| Some(s * factor)).take(levels).collect()
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub n_u: usize,
    pub n_p: usize,
    pub errors: ErrorNorms,
    /// Observed rates against the previous level; `None` on the first.
    pub rates: Option<[f64; 3]>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub case: String,
    pub degree: usize,
    pub family: String,
    pub levels: Vec<LevelResult>,
}

/// `log(e_prev / e) / log(h_prev / h)`.
pub fn observed_rate(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

impl ConvergenceReport {
    pub const CSV_HEADER: &'static str = "level,h,Nu,Np,e1,e0,ep,rate1,rate0,ratep";

    /// Rates `[e1, e0, ep]` between the two finest levels.
    pub fn finest_rates(&self) -> Option<[f64; 3]> {
        self.levels.last().and_then(|l| l.rates)
    }

    /// CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(Self::CSV_HEADER);
        s.push('\n');
        for l in &self.levels {
            let e = &l.errors;
            let _ = write!(s, "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e}", l.level, l.h, l.n_u, l.n_p, e.e1, e.e0, e.ep);
            match l.rates {
                Some([r1, r0, rp]) => {
                    let _ = writeln!(s, ",{r1:.16e},{r0:.16e},{rp:.16e}");
                }
                None => s.push_str(",,,\n"),
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), VerifyError> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| VerifyError::Io { path: path.display().to_string(), reason: e.to_string() })
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut s = format!("case {} k={} family {}\n", self.case, self.degree, self.family);
        let _ = writeln!(
            s,
            "{:>5} {:>10} {:>8} {:>7} {:>11} {:>11} {:>11} {:>6} {:>6} {:>6}",
            "level", "h", "Nu", "Np", "e1", "e0", "ep", "r1", "r0", "rp"
        );
        for l in &self.levels {
            let e = &l.errors;
            let _ = write!(
                s,
                "{:>5} {:>10.4e} {:>8} {:>7} {:>11.4e} {:>11.4e} {:>11.4e}",
                l.level, l.h, l.n_u, l.n_p, e.e1, e.e0, e.ep
            );
            match l.rates {
                Some([a, b, c]) => {
                    let _ = writeln!(s, " {a:>6.2} {b:>6.2} {c:>6.2}");
                }
                None => s.push_str(&format!(" {:>6} {:>6} {:>6}\n", "-", "-", "-")),
            }
        }
        s
    }
}

/// Settings shared by all levels of a study.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyConfig {
    pub solver: SolverConfig,
    pub assembly: AssemblyOptions,
}

/// Minimum number of levels in a study.
pub const MIN_LEVELS: usize = 3;

/// Solves `case` with degree `k` on each mesh of `family` given by `sizes`.
pub fn convergence_study(
    case: &ManufacturedCase,
    k: usize,
    family: &MeshFamily,
    sizes: &[usize],
    config: &StudyConfig,
) -> Result<ConvergenceReport, VerifyError> {
    if sizes.len() < MIN_LEVELS {
        return Err(VerifyError::TooFewLevels(sizes.len()));
    }
    let meshes = sizes.iter().map(|&n| family.build(n, case.domain())).collect::<Result<Vec<_>, _>>()?;
    convergence_study_on(case, k, &meshes, family.name(), config)
}

/// Same as [`convergence_study`] on explicit meshes, ordered coarse to fine.
pub fn convergence_study_on(
    case: &ManufacturedCase,
    k: usize,
    meshes: &[PolyMesh],
    family_name: &str,
    config: &StudyConfig,
) -> Result<ConvergenceReport, VerifyError> {
    let mut levels: Vec<LevelResult> = Vec::with_capacity(meshes.len());
    for (level, mesh) in meshes.iter().enumerate() {
        let h = mesh.h();
        if let Some(prev) = levels.last() {
            if h >= prev.h {
                return Err(VerifyError::NonDecreasingH { level, h, previous: prev.h });
            }
        }
        let system =
            assemble_with_options(mesh, k, case.nu(), |p| case.load(p), |p| case.boundary(p), config.assembly)?;
        let solution = solve_stokes(&system, &config.solver)?;
        let errors = error_norms(mesh, &system, &solution, case)?;
        let rates = levels.last().map(|p| {
            [
                observed_rate(p.errors.e1, errors.e1, p.h, h),
                observed_rate(p.errors.e0, errors.e0, p.h, h),
                observed_rate(p.errors.ep, errors.ep, p.h, h),
            ]
        });
        log::info!(
            "{} k={k} level {level}: h={h:.4e} e1={:.4e} e0={:.4e} ep={:.4e}",
            case.name(),
            errors.e1,
            errors.e0,
            errors.ep
        );
        levels.push(LevelResult {
            level,
            h,
            n_u: system.dofs.n_velocity(),
            n_p: system.dofs.n_pressure(),
            errors,
            rates,
            residual: solution.residual,
        });
    }
    Ok(ConvergenceReport { case: case.name().into(), degree: k, family: family_name.into(), levels })
}
