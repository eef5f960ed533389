//! Clipped Voronoi tessellations of a rectangle with optional Lloyd relaxation.
//!
//! Each cell is obtained by clipping the domain rectangle with the bisector
//! half-planes of nearby seeds. Candidate seeds are visited ring by ring in a
//! bucket grid; a cell is final once every unvisited seed lies farther than
//! twice the cell's radius. Vertices computed independently by neighbouring
//! cells are merged by proximity.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_mesh, dist, Domain, MeshError, PolyMesh};
use crate::Point;

/// Voronoi mesh of `n_seeds` random seeds in `domain`, relaxed by `lloyd_iters`
/// Lloyd steps. Deterministic for a fixed `rng_seed`.
pub fn gen_voronoi_polygonal(
    n_seeds: usize,
    lloyd_iters: usize,
    rng_seed: u64,
    domain: Domain,
) -> Result<PolyMesh, MeshError> {
    if n_seeds < 2 {
        return Err(MeshError::InvalidParameter(format!("Voronoi mesh needs at least 2 seeds (got {n_seeds})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let seeds: Vec<Point> = (0..n_seeds)
        .map(|_| {
            [domain.min[0] + domain.width() * rng.gen::<f64>(), domain.min[1] + domain.height() * rng.gen::<f64>()]
        })
        .collect();
    voronoi_from_seeds(&seeds, lloyd_iters, domain).map(|(m, _)| m)
}

/// Voronoi mesh of explicit seeds; also returns the seeds after relaxation.
pub fn voronoi_from_seeds(
    seeds: &[Point],
    lloyd_iters: usize,
    domain: Domain,
) -> Result<(PolyMesh, Vec<Point>), MeshError> {
    if seeds.len() < 2 {
        return Err(MeshError::InvalidParameter(format!("Voronoi mesh needs at least 2 seeds (got {})", seeds.len())));
    }
    if let Some(p) = seeds.iter().position(|s| !domain.contains(*s)) {
        return Err(MeshError::InvalidParameter(format!("seed {p} lies outside the domain")));
    }
    let mut seeds = seeds.to_vec();
    check_distinct(&seeds, &domain)?;
    let mut polys = clip_cells(&seeds, &domain);
    for _ in 0..lloyd_iters {
        for (s, poly) in seeds.iter_mut().zip(&polys) {
            *s = polygon_centroid(poly);
        }
        check_distinct(&seeds, &domain)?;
        polys = clip_cells(&seeds, &domain);
    }
    let mesh = merge_cells(&polys, &domain)?;
    Ok((mesh, seeds))
}

struct Buckets {
    n: usize,
    size: [f64; 2],
    origin: Point,
    items: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(seeds: &[Point], domain: &Domain) -> Self {
        let n = ((seeds.len() as f64).sqrt().ceil() as usize).max(1);
        let size = [domain.width() / n as f64, domain.height() / n as f64];
        let mut b = Self { n, size, origin: domain.min, items: vec![Vec::new(); n * n] };
        for (i, &s) in seeds.iter().enumerate() {
            let (bx, by) = b.locate(s);
            b.items[by * n + bx].push(i);
        }
        b
    }

    fn locate(&self, p: Point) -> (usize, usize) {
        let bx = (((p[0] - self.origin[0]) / self.size[0]) as usize).min(self.n - 1);
        let by = (((p[1] - self.origin[1]) / self.size[1]) as usize).min(self.n - 1);
        (bx, by)
    }

    /// Seeds in buckets at Chebyshev distance exactly `r` from `(bx, by)`.
    fn ring(&self, bx: usize, by: usize, r: usize, out: &mut Vec<usize>) {
        out.clear();
        let (bx, by, r, n) = (bx as i64, by as i64, r as i64, self.n as i64);
        for y in by - r..=by + r {
            if y < 0 || y >= n {
                continue;
            }
            for x in bx - r..=bx + r {
                if x < 0 || x >= n {
                    continue;
                }
                if (x - bx).abs() != r && (y - by).abs() != r {
                    continue;
                }
                out.extend_from_slice(&self.items[(y * n + x) as usize]);
            }
        }
    }
}

fn check_distinct(seeds: &[Point], domain: &Domain) -> Result<(), MeshError> {
    let b = Buckets::new(seeds, domain);
    let mut ring = Vec::new();
    for (i, &s) in seeds.iter().enumerate() {
        let (bx, by) = b.locate(s);
        for r in 0..=1 {
            b.ring(bx, by, r, &mut ring);
            for &j in &ring {
                if j > i && dist(s, seeds[j]) <= 1e-12 {
                    return Err(MeshError::DegenerateSeedConfiguration { first: i, second: j });
                }
            }
        }
    }
    Ok(())
}

fn clip_cells(seeds: &[Point], domain: &Domain) -> Vec<Vec<Point>> {
    let b = Buckets::new(seeds, domain);
    let mut ring = Vec::new();
    let max_ring = b.n;
    let min_bucket = b.size[0].min(b.size[1]);
    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut poly = vec![domain.min, [domain.max[0], domain.min[1]], domain.max, [domain.min[0], domain.max[1]]];
            let (bx, by) = b.locate(s);
            for r in 0..=max_ring {
                b.ring(bx, by, r, &mut ring);
                for &j in &ring {
                    if j != i {
                        poly = clip_half_plane(&poly, s, seeds[j]);
                    }
                }
                let radius = poly.iter().map(|&p| dist(p, s)).fold(0.0, f64::max);
                if 2.0 * radius <= r as f64 * min_bucket {
                    break;
                }
            }
            poly
        })
        .collect()
}

/// Keeps the part of a convex polygon closer to `s` than to `t`.
fn clip_half_plane(poly: &[Point], s: Point, t: Point) -> Vec<Point> {
    let d = [t[0] - s[0], t[1] - s[1]];
    let m = [0.5 * (s[0] + t[0]), 0.5 * (s[1] + t[1])];
    let side = |p: Point| (p[0] - m[0]) * d[0] + (p[1] - m[1]) * d[1];
    let vals: Vec<f64> = poly.iter().map(|&p| side(p)).collect();
    if vals.iter().all(|&v| v <= 0.0) {
        return poly.to_vec();
    }
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (poly[i], poly[j]);
        let (fa, fb) = (vals[i], vals[j]);
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa <= 0.0) != (fb <= 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn polygon_centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let o = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = [poly[i][0] - o[0], poly[i][1] - o[1]];
        let q = [poly[(i + 1) % n][0] - o[0], poly[(i + 1) % n][1] - o[1]];
        let w = p[0] * q[1] - p[1] * q[0];
        a += w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

fn merge_cells(polys: &[Vec<Point>], domain: &Domain) -> Result<PolyMesh, MeshError> {
    let tol = 1e-9 * domain.width().max(domain.height());
    let key = |p: Point| ((p[0] / tol).floor() as i64, (p[1] / tol).floor() as i64);
    let mut lookup: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut cell: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(ids) = lookup.get(&(kx + dx, ky + dy)) {
                        if let Some(&id) = ids.iter().find(|&&id| dist(vertices[id], p) <= tol) {
                            found = Some(id);
                            break 'search;
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                vertices.push(p);
                lookup.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if cell.last() != Some(&id) {
                cell.push(id);
            }
        }
        while cell.len() > 1 && cell.first() == cell.last() {
            cell.pop();
        }
        cells.push(cell);
    }
    build_mesh(vertices, cells)
}
