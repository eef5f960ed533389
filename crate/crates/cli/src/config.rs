//! Command-line and config-file parsing into a validated [`RunConfig`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ncvem::linsolve::SolverConfig;
use ncvem::verify::{case_by_name, MeshFamily, MIN_LEVELS};
use ncvem::MAX_DEGREE;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("unknown key '{0}'")]
    UnknownFlag(String),
    #[error("invalid value for '{key}': {message}")]
    InvalidValue { key: String, message: String },
    #[error("cannot read config file {path}: {message}")]
    File { path: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a mesh and write it as JSON and VTK.
    Mesh,
    /// Solve one manufactured case and report its errors.
    Solve,
    /// Run a convergence study over successively refined meshes.
    Convergence,
    /// Estimate the discrete inf-sup constant.
    Infsup,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mesh => "mesh",
            Self::Solve => "solve",
            Self::Convergence => "convergence",
            Self::Infsup => "infsup",
        }
    }
}

/// Options shared by all subcommands. Every field is optional so that
/// values from `--config` can fill the gaps.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
pub struct Options {
    /// Manufactured case: poly-1 ... poly-5 or trig [default: trig]
    #[arg(long, global = true)]
    pub case: Option<String>,
    /// Polynomial degree, 1..=5 [default: 1]
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Viscosity [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Mesh family and size: quad:N, voronoi:N or distorted:N [default: quad:8]
    #[arg(long, global = true)]
    pub mesh: Option<String>,
    /// Read the mesh from a JSON file instead of generating one
    #[arg(long, global = true)]
    pub mesh_file: Option<PathBuf>,
    /// Number of refinement levels of a convergence study [default: 4]
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Relative residual tolerance of the linear solver [default: 1e-10]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Largest system solved by the direct backend [default: 50000]
    #[arg(long, global = true)]
    pub direct_threshold: Option<usize>,
    /// Output directory for artifacts [default: ncvem-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed of the random mesh generators [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

impl Options {
    /// Fills every unset field from `other`.
    fn or(self, other: Options) -> Options {
        Options {
            case: self.case.or(other.case),
            k: self.k.or(other.k),
            nu: self.nu.or(other.nu),
            mesh: self.mesh.or(other.mesh),
            mesh_file: self.mesh_file.or(other.mesh_file),
            levels: self.levels.or(other.levels),
            tol: self.tol.or(other.tol),
            direct_threshold: self.direct_threshold.or(other.direct_threshold),
            out: self.out.or(other.out),
            seed: self.seed.or(other.seed),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ncvem", version, about = "Nonconforming virtual element solver for 2D Stokes flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
    /// Flat JSON file with the same keys as the flags; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// A generated family; `size` is the cell count parameter of the
    /// (coarsest) mesh, `None` for the family default.
    Generated {
        family: MeshFamily,
        size: Option<usize>,
    },
    File(PathBuf),
}

impl MeshSource {
    /// Size used when none is given: 8×8 grids or 64 Voronoi cells, and
    /// a quarter of that as the coarsest level of a study.
    pub fn default_size(family: &MeshFamily, command: Command) -> usize {
        let coarse = command == Command::Convergence;
        match (family, coarse) {
            (MeshFamily::Voronoi { .. }, false) => 64,
            (MeshFamily::Voronoi { .. }, true) => 16,
            (_, false) => 8,
            (_, true) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub k: usize,
    pub nu: f64,
    pub case: String,
    pub mesh: MeshSource,
    pub levels: usize,
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub seed: u64,
}

fn parse_mesh(spec: &str, seed: u64) -> Result<MeshSource, ConfigError> {
    let (name, size) = match spec.split_once(':') {
        Some((n, s)) => {
            let size: usize =
                s.parse().map_err(|_| invalid("mesh", format!("size '{s}' is not a positive integer")))?;
            if size == 0 {
                return Err(invalid("mesh", "size must be at least 1"));
            }
            (n, Some(size))
        }
        None => (spec, None),
    };
    let family = match name {
        "quad" => MeshFamily::Quad,
        "voronoi" => match MeshFamily::DEFAULT_VORONOI {
            MeshFamily::Voronoi { lloyd_iters, .. } => MeshFamily::Voronoi { lloyd_iters, seed },
            other => other,
        },
        "distorted" => match MeshFamily::DEFAULT_DISTORTED {
            MeshFamily::Distorted { fraction, .. } => MeshFamily::Distorted { fraction, seed },
            other => other,
        },
        other => {
            return Err(invalid("mesh", format!("unknown family '{other}' (expected quad, voronoi or distorted)")))
        }
    };
    Ok(MeshSource::Generated { family, size })
}

fn read_config_file(path: &Path) -> Result<Options, ConfigError> {
    let file_err = |message: String| ConfigError::File { path: path.display().to_string(), message };
    let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| file_err(e.to_string()))?;
    let map = value.as_object().ok_or_else(|| file_err("expected a JSON object".into()))?;
    let known = ["case", "k", "nu", "mesh", "mesh_file", "levels", "tol", "direct_threshold", "out", "seed"];
    if let Some(key) = map.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(ConfigError::UnknownFlag(key.clone()));
    }
    serde_json::from_value(value).map_err(|e| file_err(e.to_string()))
}

/// Parses `args` (including the program name) and the optional config file.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => Options::default(),
    };
    resolve(cli.command, cli.options.or(file))
}

/// Applies defaults to merged options and validates them.
pub fn resolve(command: Command, o: Options) -> Result<RunConfig, ConfigError> {
    let k = o.k.unwrap_or(1);
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(invalid("k", format!("k must be in 1..={MAX_DEGREE}")));
    }
    let nu = o.nu.unwrap_or(1.0);
    if !(nu.is_finite() && nu > 0.0) {
        return Err(invalid("nu", "viscosity must be positive and finite"));
    }
    let case = o.case.unwrap_or_else(|| "trig".into());
    case_by_name(&case).map_err(|e| invalid("case", e.to_string()))?;
    let seed = o.seed.unwrap_or(1);
    let mesh = match (o.mesh_file, o.mesh) {
        (Some(_), Some(_)) => return Err(invalid("mesh", "--mesh and --mesh-file are mutually exclusive")),
        (Some(path), None) => MeshSource::File(path),
        (None, spec) => parse_mesh(spec.as_deref().unwrap_or("quad"), seed)?,
    };
    let levels = o.levels.unwrap_or(4);
    if levels == 0 {
        return Err(invalid("levels", "levels must be at least 1"));
    }
    if command == Command::Convergence {
        if levels < MIN_LEVELS {
            return Err(invalid("levels", format!("a convergence study needs at least {MIN_LEVELS} levels")));
        }
        if matches!(mesh, MeshSource::File(_)) {
            return Err(invalid("mesh_file", "a convergence study needs a generated mesh family"));
        }
    }
    let defaults = SolverConfig::default();
    let tol = o.tol.unwrap_or(defaults.tol);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tol", "tolerance must be positive and finite"));
    }
    let solver =
        SolverConfig { tol, direct_threshold: o.direct_threshold.unwrap_or(defaults.direct_threshold), ..defaults };
    Ok(RunConfig {
        command,
        k,
        nu,
        case,
        mesh,
        levels,
        solver,
        out: o.out.unwrap_or_else(|| PathBuf::from("ncvem-out")),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ConfigError> {
        parse_config(std::iter::once("ncvem").chain(args.iter().copied()))
    }

    #[test]
    fn solve_flags() {
        let c = parse(&["solve", "--case", "trig", "--k", "2", "--mesh", "quad:16"]).unwrap();
        assert_eq!(c.command, Command::Solve);
        assert_eq!(c.k, 2);
        assert_eq!(c.case, "trig");
        assert_eq!(c.mesh, MeshSource::Generated { family: MeshFamily::Quad, size: Some(16) });
        assert_eq!(c.nu, 1.0);
        assert_eq!(c.solver.tol, 1e-10);
    }

    #[test]
    fn degree_out_of_range() {
        let err = parse(&["solve", "--k", "9"]).unwrap_err();
        assert_eq!(err.to_string(), "invalid value for 'k': k must be in 1..=5");
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"k": 1, "nu": 0.5, "mesh": "voronoi:32"}"#).unwrap();
        let c = parse(&["solve", "--config", path.to_str().unwrap(), "--k", "3"]).unwrap();
        assert_eq!(c.k, 3);
        assert_eq!(c.nu, 0.5);
        assert!(matches!(c.mesh, MeshSource::Generated { family: MeshFamily::Voronoi { .. }, size: Some(32) }));
    }

    #[test]
    fn unknown_file_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"k": 1, "degree": 2}"#).unwrap();
        let err = parse(&["solve", "--config", path.to_str().unwrap()]).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownFlag(ref k) if k == "degree"));
    }

    #[test]
    fn unknown_flag_is_a_clap_error() {
        assert!(matches!(parse(&["solve", "--degree", "2"]), Err(ConfigError::Clap(_))));
    }

    #[test]
    fn seed_reaches_the_mesh_family() {
        let c = parse(&["mesh", "--mesh", "voronoi:10", "--seed", "7"]).unwrap();
        assert_eq!(
            c.mesh,
            MeshSource::Generated { family: MeshFamily::Voronoi { lloyd_iters: 20, seed: 7 }, size: Some(10) }
        );
    }

    #[test]
    fn invalid_values() {
        for (args, key) in [
            (&["solve", "--nu", "0"][..], "nu"),
            (&["solve", "--mesh", "hex:4"][..], "mesh"),
            (&["solve", "--mesh", "quad:x"][..], "mesh"),
            (&["solve", "--case", "poly-9"][..], "case"),
            (&["convergence", "--levels", "2"][..], "levels"),
            (&["solve", "--tol", "-1"][..], "tol"),
        ] {
            match parse(args) {
                Err(ConfigError::InvalidValue { key: k, .. }) => assert_eq!(k, key, "{args:?}"),
                other => panic!("{args:?}: {other:?}"),
            }
        }
    }
}
