//! Mesh JSON and legacy VTK output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_mesh, MeshError, PolyMesh};
use crate::Point;

#[derive(Debug, thiserror::Error)]
pub enum MeshIoError {
    #[error("cannot read mesh file {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed mesh JSON in {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("invalid mesh in {path}: {source}")]
    Mesh { path: String, source: MeshError },
}

/// On-disk mesh representation: `{"vertices": [[x, y], ...], "cells": [[i0, i1, ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshJson {
    pub vertices: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
}

impl From<&PolyMesh> for MeshJson {
    fn from(m: &PolyMesh) -> Self {
        Self { vertices: m.vertices().to_vec(), cells: m.cells().to_vec() }
    }
}

pub fn mesh_to_json(mesh: &PolyMesh) -> String {
    serde_json::to_string(&MeshJson::from(mesh)).expect("mesh serialization cannot fail")
}

pub fn mesh_from_json(text: &str) -> Result<PolyMesh, MeshIoError> {
    let raw: MeshJson =
        serde_json::from_str(text).map_err(|source| MeshIoError::Parse { path: "<string>".into(), source })?;
    build_mesh(raw.vertices, raw.cells).map_err(|source| MeshIoError::Mesh { path: "<string>".into(), source })
}

pub fn read_mesh_json(path: &Path) -> Result<PolyMesh, MeshIoError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| MeshIoError::Read { path: p.clone(), source })?;
    let raw: MeshJson = serde_json::from_str(&text).map_err(|source| MeshIoError::Parse { path: p.clone(), source })?;
    build_mesh(raw.vertices, raw.cells).map_err(|source| MeshIoError::Mesh { path: p, source })
}

pub fn write_mesh_json(mesh: &PolyMesh, path: &Path) -> Result<(), MeshIoError> {
    std::fs::write(path, mesh_to_json(mesh))
        .map_err(|source| MeshIoError::Write { path: path.display().to_string(), source })
}

/// Legacy VTK POLYDATA description of the mesh cells.
pub fn mesh_to_vtk(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nncvem polygonal mesh\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]);
    }
    let size: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "POLYGONS {} {}", mesh.n_cells(), size);
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.len());
        for v in c {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
    s.push_str("SCALARS cell_area double 1\nLOOKUP_TABLE default\n");
    for c in 0..mesh.n_cells() {
        let _ = writeln!(s, "{:.17e}", mesh.geometry(c).area);
    }
    s
}

pub fn write_mesh_vtk(mesh: &PolyMesh, path: &Path) -> Result<(), MeshIoError> {
    std::fs::write(path, mesh_to_vtk(mesh))
        .map_err(|source| MeshIoError::Write { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_voronoi_polygonal, Domain};

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = gen_voronoi_polygonal(20, 2, 5, Domain::UNIT_SQUARE).unwrap();
        let back = mesh_from_json(&mesh_to_json(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn reader_tolerates_whitespace() {
        let text = "{ \"vertices\" : [ [0,0],\n [1, 0], [1,1] ,[0, 1]],\n\t\"cells\": [[0,1,2,3]] }\n";
        let m = mesh_from_json(text).unwrap();
        assert_eq!(m.n_cells(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(mesh_from_json(r#"{"vertices": [], "cells": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn vtk_has_polygons() {
        let m = crate::mesh::gen_quad_grid(2, 2, Domain::UNIT_SQUARE).unwrap();
        let v = mesh_to_vtk(&m);
        assert!(v.contains("POLYGONS 4 20"));
        assert!(v.contains("POINTS 9 double"));
    }
}
