use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_mesh, signed_area, Domain, MeshError, PolyMesh};
use crate::Point;

fn grid_vertices(nx: usize, ny: usize, domain: Domain) -> Vec<Point> {
    let (dx, dy) = (domain.width() / nx as f64, domain.height() / ny as f64);
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // pin the far edges to the exact domain bounds
            let x = if i == nx { domain.max[0] } else { domain.min[0] + i as f64 * dx };
            let y = if j == ny { domain.max[1] } else { domain.min[1] + j as f64 * dy };
            v.push([x, y]);
        }
    }
    v
}

fn grid_cells(nx: usize, ny: usize) -> Vec<Vec<usize>> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    cells
}

/// Structured `nx × ny` grid of quadrilaterals.
pub fn gen_quad_grid(nx: usize, ny: usize, domain: Domain) -> Result<PolyMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidParameter(format!("grid needs nx, ny >= 1 (got {nx}x{ny})")));
    }
    build_mesh(grid_vertices(nx, ny, domain), grid_cells(nx, ny))
}

/// Structured grid whose interior vertices are displaced by a uniform random
/// offset of at most `amplitude` (relative to the domain size) per coordinate.
pub fn gen_distorted_quads(
    nx: usize,
    ny: usize,
    amplitude: f64,
    rng_seed: u64,
    domain: Domain,
) -> Result<PolyMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidParameter(format!("grid needs nx, ny >= 1 (got {nx}x{ny})")));
    }
    let limit = 0.5 / nx.max(ny) as f64;
    if !(0.0..limit).contains(&amplitude) {
        return Err(MeshError::InvalidParameter(format!("distortion amplitude {amplitude} must lie in [0, {limit})")));
    }
    let mut vertices = grid_vertices(nx, ny, domain);
    if amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for j in 1..ny {
            for i in 1..nx {
                let v = &mut vertices[j * (nx + 1) + i];
                v[0] += amplitude * domain.width() * rng.gen_range(-1.0..=1.0);
                v[1] += amplitude * domain.height() * rng.gen_range(-1.0..=1.0);
            }
        }
    }
    let cells = grid_cells(nx, ny);
    for (c, cell) in cells.iter().enumerate() {
        let area = signed_area(cell.iter().map(|&v| vertices[v]));
        if area <= 0.0 {
            return Err(MeshError::InvertedCell { cell: c, area });
        }
    }
    build_mesh(vertices, cells)
}
