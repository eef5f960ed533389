//! Polygonal meshes: data model, generators, geometry and quadrature.
//!
//! Edges carry a canonical orientation from the lower to the higher vertex
//! index. Every edge-based quantity (edge moments, edge monomials) is defined
//! in that frame so the two cells sharing an edge agree without sign tables.

mod generators;
pub mod io;
mod quadrature;
mod voronoi;

use std::collections::HashMap;

use crate::Point;

pub use generators::{gen_distorted_quads, gen_quad_grid};
pub use quadrature::{
    edge_quadrature, gauss_legendre, polygon_quadrature, triangle_quadrature, triangulate, QuadratureRule,
};
pub use voronoi::{gen_voronoi_polygonal, voronoi_from_seeds};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("cell {cell} references vertex {vertex}, but the mesh has {n_vertices} vertices")]
    DanglingVertexReference { cell: usize, vertex: usize, n_vertices: usize },
    #[error("cell {cell} is not a simple polygon: {reason}")]
    NonSimpleCell { cell: usize, reason: String },
    #[error("cell {cell} has non-positive signed area {area:e} (clockwise or degenerate loop)")]
    NegativeArea { cell: usize, area: f64 },
    #[error("edge ({0}, {1}) is shared by more than two cells or traversed twice in the same direction")]
    NonManifoldEdge(usize, usize),
    #[error("cell {cell} inverted after perturbation (area {area:e})")]
    InvertedCell { cell: usize, area: f64 },
    #[error("seeds {first} and {second} coincide within 1e-12")]
    DegenerateSeedConfiguration { first: usize, second: usize },
    #[error("triangulation of cell {cell} failed: {reason}")]
    TriangulationFailure { cell: usize, reason: String },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
}

/// Axis-aligned rectangular domain `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Domain {
    pub min: Point,
    pub max: Point,
}

impl Domain {
    pub const UNIT_SQUARE: Domain = Domain { min: [0.0, 0.0], max: [1.0, 1.0] };

    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self::UNIT_SQUARE
    }
}

/// Geometric quantities of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub area: f64,
    pub centroid: Point,
    /// Cell diameter: the largest distance between two of its vertices.
    pub diameter: f64,
    /// Rows are the principal axes of inertia, each divided by the half-extent
    /// of the cell along it; `x ↦ frame · (x - centroid)` maps the cell into `[-1, 1]²`.
    pub frame: [[f64; 2]; 2],
    /// Outward unit normal of each local edge, in loop order.
    pub normals: Vec<Point>,
    /// Length of each local edge, in loop order.
    pub edge_lengths: Vec<f64>,
}

impl CellGeometry {
    pub fn perimeter(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }
}

/// Shape-regularity indicators of a mesh, reported but never enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// Smallest ratio of an edge length to the diameter of a cell containing it.
    pub min_edge_to_diameter: f64,
    /// Smallest ratio `area / diameter²` over cells.
    pub min_area_to_diameter_sq: f64,
    /// Cells that are not star-shaped with respect to their centroid.
    pub non_star_cells: Vec<usize>,
}

/// Immutable polygonal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    edges: Vec<[usize; 2]>,
    cells: Vec<Vec<usize>>,
    cell_edges: Vec<Vec<(usize, i8)>>,
    edge_cells: Vec<Vec<usize>>,
    boundary_edges: Vec<usize>,
    is_boundary: Vec<bool>,
    geometry: Vec<CellGeometry>,
}

/// Builds a mesh from vertex coordinates and counterclockwise cell loops.
pub fn build_mesh(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<PolyMesh, MeshError> {
    PolyMesh::new(vertices, cells)
}

impl PolyMesh {
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (c, cell) in cells.iter().enumerate() {
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::DanglingVertexReference { cell: c, vertex: v, n_vertices: nv });
            }
            check_simple(c, cell, &vertices)?;
            let area = signed_area(cell.iter().map(|&v| vertices[v]));
            if area <= 0.0 {
                return Err(MeshError::NegativeArea { cell: c, area });
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_cells: Vec<Vec<usize>> = Vec::new();
        let mut edge_signs: Vec<Vec<i8>> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                let (lo, hi, sign) = if a < b { (a, b, 1) } else { (b, a, -1) };
                let e = *edge_index.entry((lo, hi)).or_insert_with(|| {
                    edges.push([lo, hi]);
                    edge_cells.push(Vec::new());
                    edge_signs.push(Vec::new());
                    edges.len() - 1
                });
                if edge_cells[e].len() == 2 || edge_signs[e].contains(&sign) {
                    return Err(MeshError::NonManifoldEdge(lo, hi));
                }
                edge_cells[e].push(c);
                edge_signs[e].push(sign);
                local.push((e, sign));
            }
            cell_edges.push(local);
        }

        let is_boundary: Vec<bool> = edge_cells.iter().map(|c| c.len() == 1).collect();
        let boundary_edges = (0..edges.len()).filter(|&e| is_boundary[e]).collect();
        let geometry = cells.iter().map(|cell| cell_geometry(cell, &vertices)).collect();

        let mesh = Self { vertices, edges, cells, cell_edges, edge_cells, boundary_edges, is_boundary, geometry };
        let reg = mesh.regularity();
        if !reg.non_star_cells.is_empty() {
            log::warn!(
                "{} cells are not star-shaped with respect to their centroid (first: {})",
                reg.non_star_cells.len(),
                reg.non_star_cells[0]
            );
        }
        if reg.min_edge_to_diameter < 1e-3 {
            log::warn!("mesh has very short edges: min |e|/h_E = {:e}", reg.min_edge_to_diameter);
        }
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    /// Canonically oriented edges `(lo, hi)` with `lo < hi`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    /// Local edges of a cell in loop order; the sign is `+1` when the
    /// counterclockwise traversal runs along the canonical orientation.
    pub fn cell_edges(&self, c: usize) -> &[(usize, i8)] {
        &self.cell_edges[c]
    }

    pub fn edge_cells(&self, e: usize) -> &[usize] {
        &self.edge_cells[e]
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.is_boundary[e]
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        let [a, b] = self.edges[e];
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        dist(a, b)
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edge_points(e);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// `V - E + C`; equals 1 for a simply connected planar mesh.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.cells.len() as i64
    }

    pub fn regularity(&self) -> RegularityReport {
        let mut min_edge = f64::INFINITY;
        let mut min_area = f64::INFINITY;
        let mut non_star = Vec::new();
        for (c, g) in self.geometry.iter().enumerate() {
            for &l in &g.edge_lengths {
                min_edge = min_edge.min(l / g.diameter);
            }
            min_area = min_area.min(g.area / (g.diameter * g.diameter));
            if !star_shaped_wrt(&self.cell_points(c), g.centroid) {
                non_star.push(c);
            }
        }
        RegularityReport { min_edge_to_diameter: min_edge, min_area_to_diameter_sq: min_area, non_star_cells: non_star }
    }

    /// Bounding box of all vertices.
    pub fn bounding_box(&self) -> Domain {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        Domain { min, max }
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(crate) fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Shoelace signed area of a closed loop.
pub fn signed_area(points: impl IntoIterator<Item = Point>) -> f64 {
    let pts: Vec<Point> = points.into_iter().collect();
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

fn polygon_centroid(pts: &[Point]) -> (f64, Point) {
    // shift to the first vertex to limit cancellation
    let o = pts[0];
    let n = pts.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = [pts[i][0] - o[0], pts[i][1] - o[1]];
        let q = [pts[(i + 1) % n][0] - o[0], pts[(i + 1) % n][1] - o[1]];
        let w = p[0] * q[1] - p[1] * q[0];
        a += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    let a = 0.5 * a;
    (a, [o[0] + cx / (6.0 * a), o[1] + cy / (6.0 * a)])
}

fn cell_geometry(cell: &[usize], vertices: &[Point]) -> CellGeometry {
    let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
    let (area, centroid) = polygon_centroid(&pts);
    let n = pts.len();
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max(dist(pts[i], pts[j]));
        }
    }
    let frame = principal_frame(&pts, centroid);
    let mut normals = Vec::with_capacity(n);
    let mut edge_lengths = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let len = dist(a, b);
        normals.push([(b[1] - a[1]) / len, -(b[0] - a[0]) / len]);
        edge_lengths.push(len);
    }
    CellGeometry { area, centroid, diameter, frame, normals, edge_lengths }
}

/// Principal axes of the second moment tensor about `centroid`, scaled by the
/// half-extent of the vertices along each axis.
fn principal_frame(pts: &[Point], centroid: Point) -> [[f64; 2]; 2] {
    let n = pts.len();
    let (mut jxx, mut jxy, mut jyy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = [pts[i][0] - centroid[0], pts[i][1] - centroid[1]];
        let b = [pts[(i + 1) % n][0] - centroid[0], pts[(i + 1) % n][1] - centroid[1]];
        // signed fan triangle (centroid, a, b)
        let w = (a[0] * b[1] - a[1] * b[0]) / 12.0;
        jxx += w * (a[0] * a[0] + b[0] * b[0] + a[0] * b[0]);
        jyy += w * (a[1] * a[1] + b[1] * b[1] + a[1] * b[1]);
        jxy += w * (a[0] * a[1] + b[0] * b[1] + 0.5 * (a[0] * b[1] + a[1] * b[0]));
    }
    // nearly isotropic cells keep the coordinate axes
    let theta =
        if (jxx - jyy).hypot(2.0 * jxy) <= 1e-10 * (jxx + jyy) { 0.0 } else { 0.5 * (2.0 * jxy).atan2(jxx - jyy) };
    let axes = [[theta.cos(), theta.sin()], [-theta.sin(), theta.cos()]];
    let mut frame = [[0.0; 2]; 2];
    for (row, ax) in frame.iter_mut().zip(&axes) {
        let extent =
            pts.iter().map(|p| (ax[0] * (p[0] - centroid[0]) + ax[1] * (p[1] - centroid[1])).abs()).fold(0.0, f64::max);
        *row = [ax[0] / extent, ax[1] / extent];
    }
    frame
}

fn check_simple(c: usize, cell: &[usize], vertices: &[Point]) -> Result<(), MeshError> {
    let n = cell.len();
    if n < 3 {
        return Err(MeshError::NonSimpleCell { cell: c, reason: format!("only {n} vertices") });
    }
    let mut seen = cell.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(MeshError::NonSimpleCell { cell: c, reason: "repeated vertex".into() });
    }
    let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if a == b {
            return Err(MeshError::NonSimpleCell { cell: c, reason: "zero-length edge".into() });
        }
        for j in i + 1..n {
            // adjacent edges share a vertex; only test disjoint pairs
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (p, q) = (pts[j], pts[(j + 1) % n]);
            if segments_intersect(a, b, p, q) {
                return Err(MeshError::NonSimpleCell { cell: c, reason: format!("edges {i} and {j} intersect") });
            }
        }
    }
    Ok(())
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

pub(crate) fn star_shaped_wrt(pts: &[Point], center: Point) -> bool {
    let n = pts.len();
    let scale = pts.iter().map(|p| dist(*p, center)).fold(0.0, f64::max).powi(2);
    (0..n).all(|i| cross(center, pts[i], pts[(i + 1) % n]) > 1e-12 * scale)
}
