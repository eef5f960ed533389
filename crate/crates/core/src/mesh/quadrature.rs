use super::{cross, dist, star_shaped_wrt, MeshError, PolyMesh};
use crate::Point;

/// Points and weights of a quadrature rule together with the total degree it
/// integrates exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule along the segment `a → b`, exact for polynomial
/// traces of degree `order`.
pub fn edge_quadrature(a: Point, b: Point, order: usize) -> QuadratureRule {
    let n = (order + 1).div_ceil(2).max(1);
    let (xs, ws) = gauss_legendre(n);
    let half = 0.5 * dist(a, b);
    let points = xs
        .iter()
        .map(|&s| {
            let t = 0.5 * (1.0 + s);
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect();
    let weights = ws.iter().map(|w| w * half).collect();
    QuadratureRule { points, weights, order: 2 * n - 1 }
}

/// Collapsed-square (Duffy) product rule on a triangle, exact for degree `order`.
pub fn triangle_quadrature(a: Point, b: Point, c: Point, order: usize) -> QuadratureRule {
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), order };
    push_triangle(&mut rule, a, b, c, order);
    rule
}

fn push_triangle(rule: &mut QuadratureRule, a: Point, b: Point, c: Point, order: usize) {
    let nu = (order + 2).div_ceil(2);
    let nv = (order + 1).div_ceil(2).max(1);
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let jac = cross(a, b, c);
    for (&su, &au) in xu.iter().zip(&wu) {
        let u = 0.5 * (1.0 + su);
        for (&sv, &av) in xv.iter().zip(&wv) {
            let v = 0.5 * (1.0 + sv);
            let p = [
                a[0] + u * ((1.0 - v) * (b[0] - a[0]) + v * (c[0] - a[0])),
                a[1] + u * ((1.0 - v) * (b[1] - a[1]) + v * (c[1] - a[1])),
            ];
            rule.points.push(p);
            rule.weights.push(0.25 * au * av * u * jac);
        }
    }
}

/// Splits a counterclockwise simple polygon into triangles: a fan from the
/// centroid when the polygon is star-shaped with respect to it, ear clipping
/// otherwise.
pub fn triangulate(pts: &[Point], centroid: Point) -> Result<Vec<[Point; 3]>, String> {
    let n = pts.len();
    if n < 3 {
        return Err(format!("{n} vertices"));
    }
    if n == 3 {
        return Ok(vec![[pts[0], pts[1], pts[2]]]);
    }
    if star_shaped_wrt(pts, centroid) {
        return Ok((0..n).map(|i| [centroid, pts[i], pts[(i + 1) % n]]).collect());
    }
    ear_clip(pts)
}

fn ear_clip(pts: &[Point]) -> Result<Vec<[Point; 3]>, String> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::with_capacity(pts.len() - 2);
    let scale = pts.iter().map(|p| dist(*p, pts[0])).fold(0.0, f64::max).powi(2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ip, ic, inx) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (pts[ip], pts[ic], pts[inx]);
            if cross(a, b, c) <= 1e-14 * scale {
                continue;
            }
            let blocked = idx.iter().any(|&j| j != ip && j != ic && j != inx && point_in_triangle(pts[j], a, b, c));
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err("no ear found".into());
        }
    }
    tris.push([pts[idx[0]], pts[idx[1]], pts[idx[2]]]);
    Ok(tris)
}

fn point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
}

/// Quadrature over a cell of the mesh, exact for polynomials of degree `order`.
pub fn polygon_quadrature(mesh: &PolyMesh, cell: usize, order: usize) -> Result<QuadratureRule, MeshError> {
    let pts = mesh.cell_points(cell);
    let tris = triangulate(&pts, mesh.geometry(cell).centroid)
        .map_err(|reason| MeshError::TriangulationFailure { cell, reason })?;
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), order };
    for [a, b, c] in tris {
        push_triangle(&mut rule, a, b, c, order);
    }
    Ok(rule)
}
