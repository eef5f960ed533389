//! Executes a [`RunConfig`] and writes its artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ncvem::assembly::{assemble, solve_stokes, AssemblyError};
use ncvem::mesh::io::{read_mesh_json, write_mesh_json, write_mesh_vtk, MeshIoError};
use ncvem::mesh::{MeshError, PolyMesh};
use ncvem::verify::{
    case_by_name, convergence_study, error_norms, estimate_infsup, write_solution_vtk, ManufacturedCase, StudyConfig,
    VerifyError,
};
use serde::Serialize;

use crate::config::{Command, MeshSource, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot load mesh: {0}")]
    MeshFile(MeshIoError),
    #[error("cannot build mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl RunError {
    /// 2 for problems with the user's input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::MeshFile(_) => 2,
            _ => 1,
        }
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Human-readable report for stdout.
    pub report: String,
    /// Artifacts written, in order.
    pub artifacts: Vec<PathBuf>,
}

#[derive(Serialize)]
struct InfSupReport<'a> {
    mesh: &'a str,
    k: usize,
    nu: f64,
    beta: f64,
    beta_with_constant: f64,
    n_velocity_free: usize,
    n_pressure: usize,
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| RunError::Write { path: dir.display().to_string(), message: e.to_string() })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let p = self.path(name);
        std::fs::write(&p, contents)
            .map_err(|e| RunError::Write { path: p.display().to_string(), message: e.to_string() })?;
        self.written.push(p);
        Ok(())
    }

    fn record(&mut self, r: Result<(), impl std::fmt::Display>, name: &str) -> Result<(), RunError> {
        let p = self.path(name);
        r.map_err(|e| RunError::Write { path: p.display().to_string(), message: e.to_string() })?;
        self.written.push(p);
        Ok(())
    }
}

fn describe_mesh(source: &MeshSource, command: Command) -> String {
    match source {
        MeshSource::Generated { family, size } => {
            format!("{}:{}", family.name(), size.unwrap_or_else(|| MeshSource::default_size(family, command)))
        }
        MeshSource::File(p) => p.display().to_string(),
    }
}

fn load_mesh(config: &RunConfig, case: &ManufacturedCase) -> Result<PolyMesh, RunError> {
    match &config.mesh {
        MeshSource::Generated { family, size } => {
            let n = size.unwrap_or_else(|| MeshSource::default_size(family, config.command));
            Ok(family.build(n, case.domain())?)
        }
        MeshSource::File(path) => read_mesh_json(path).map_err(RunError::MeshFile),
    }
}

/// Runs the command, writing artifacts into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let case = case_by_name(&config.case)?.with_nu(config.nu);
    let mesh_name = describe_mesh(&config.mesh, config.command);
    let mut report = String::new();
    let mut out = Artifacts::new(&config.out)?;
    match config.command {
        Command::Mesh => {
            let mesh = load_mesh(config, &case)?;
            let reg = mesh.regularity();
            let _ = writeln!(report, "mesh {mesh_name}");
            let _ = writeln!(
                report,
                "vertices {}  edges {}  cells {}  h {:.6e}",
                mesh.n_vertices(),
                mesh.n_edges(),
                mesh.n_cells(),
                mesh.h()
            );
            let _ = writeln!(
                report,
                "min |e|/h_E {:.4e}  min |E|/h_E^2 {:.4e}  non-star cells {}",
                reg.min_edge_to_diameter,
                reg.min_area_to_diameter_sq,
                reg.non_star_cells.len()
            );
            out.record(write_mesh_json(&mesh, &out.path("mesh.json")), "mesh.json")?;
            out.record(write_mesh_vtk(&mesh, &out.path("mesh.vtk")), "mesh.vtk")?;
        }
        Command::Solve => {
            let mesh = load_mesh(config, &case)?;
            let k = config.k;
            let system = assemble(&mesh, k, config.nu, |p| case.load(p), |p| case.boundary(p))?;
            let solution = solve_stokes(&system, &config.solver)?;
            let e = error_norms(&mesh, &system, &solution, &case)?;
            let _ = writeln!(report, "case {} k={k} nu={} mesh {mesh_name}", case.name(), config.nu);
            let _ = writeln!(
                report,
                "Nu {}  Np {}  backend {:?}  iterations {}  residual {:.3e}",
                system.dofs.n_velocity(),
                system.dofs.n_pressure(),
                solution.backend,
                solution.iterations,
                solution.residual
            );
            let _ = writeln!(report, "e1 {:.6e}  e0 {:.6e}  ep {:.6e}", e.e1, e.e0, e.ep);
            let _ = writeln!(report, "|B u_h|_inf {:.3e}", solution.divergence_defect(&system));
            let path = out.path("solution.vtk");
            out.record(write_solution_vtk(&mesh, &system, &solution, &path), "solution.vtk")?;
        }
        Command::Convergence => {
            let MeshSource::Generated { family, size } = &config.mesh else {
                unreachable!("validated by the config parser")
            };
            let base = size.unwrap_or_else(|| MeshSource::default_size(family, config.command));
            let sizes = family.refinement_sizes(base, config.levels);
            let study = StudyConfig { solver: config.solver.clone(), ..Default::default() };
            let r = convergence_study(&case, config.k, family, &sizes, &study)?;
            report.push_str(&r.table());
            let name = "convergence.csv";
            let path = out.path(name);
            out.record(r.write_csv(&path), name)?;
        }
        Command::Infsup => {
            let mesh = load_mesh(config, &case)?;
            let est = estimate_infsup(&mesh, config.k, config.nu)?;
            let _ = writeln!(report, "inf-sup k={} mesh {mesh_name}", config.k);
            let _ = writeln!(
                report,
                "beta_h {:.6e}  (with constants {:.3e}; {} velocity, {} pressure unknowns)",
                est.beta, est.beta_with_constant, est.n_velocity_free, est.n_pressure
            );
            let json = serde_json::to_string_pretty(&InfSupReport {
                mesh: &mesh_name,
                k: config.k,
                nu: config.nu,
                beta: est.beta,
                beta_with_constant: est.beta_with_constant,
                n_velocity_free: est.n_velocity_free,
                n_pressure: est.n_pressure,
            })
            .expect("report serialization cannot fail");
            out.text("infsup.json", &(json + "\n"))?;
        }
    }
    Ok(RunSummary { report, artifacts: out.written })
}
