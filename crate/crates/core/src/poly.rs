//! Scaled monomial bases on cells and edges.
//!
//! Cell monomials are `m_α(x) = ξ^α` with `ξ = A (x - x_E)`, in graded
//! lexicographic order `1, ξ, η, ξ², ξη, η², …`; multi-index `(a, b)` of
//! degree `d = a + b` sits at position `d(d+1)/2 + b`. For a cell, the rows
//! of `A` are its principal axes of inertia divided by the half-extent of the
//! cell along each axis, so `|ξ|, |η| <= 1` on the cell and elongated cells
//! get a basis as well conditioned as round ones.
//!
//! Edge monomials are `t^j` with `t = (x - x_mid)·τ / |e|`, `τ` the
//! canonical (low to high vertex) tangent, so `t ∈ [-1/2, 1/2]`.

use crate::dense::DMat;
use crate::mesh::{CellGeometry, PolyMesh, QuadratureRule};
use crate::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("quadrature of order {got} cannot integrate degree-{required} products exactly")]
    QuadratureOrderTooLow { required: usize, got: usize },
    #[error("Gram matrix is singular to working precision")]
    SingularGram,
}

/// Dimension of `P_k` in two variables.
pub fn dim_pk(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Dimension of `P_{k-s}`, zero when `k < s`.
pub fn dim_pk_minus(k: usize, s: usize) -> usize {
    if k < s {
        0
    } else {
        dim_pk(k - s)
    }
}

/// Position of the multi-index `(a, b)` in graded lexicographic order.
#[inline]
pub fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Multi-indices of total degree `<= k` in basis order.
pub fn multi_indices(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim_pk(k));
    for d in 0..=k {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// `∫_{-1/2}^{1/2} t^n dt`.
pub fn unit_interval_moment(n: usize) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        2.0 * 0.5f64.powi(n as i32 + 1) / (n as f64 + 1.0)
    }
}

/// Product of two polynomials in one variable (coefficients by ascending power).
pub(crate) fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Scaled monomial basis of `P_k(E)` in an affine frame `ξ = A (x - c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMonomialBasis {
    degree: usize,
    center: Point,
    frame: [[f64; 2]; 2],
    exps: Vec<(usize, usize)>,
}

impl ScaledMonomialBasis {
    /// Isotropic basis `((x - center) / scale)^α`.
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        Self::with_frame(degree, center, [[1.0 / scale, 0.0], [0.0, 1.0 / scale]])
    }

    /// Basis `ξ^α` with `ξ = frame · (x - center)`.
    pub fn with_frame(degree: usize, center: Point, frame: [[f64; 2]; 2]) -> Self {
        Self { degree, center, frame, exps: multi_indices(degree) }
    }

    /// Basis attached to a cell: centered at its centroid, along its
    /// principal axes of inertia, each scaled to the half-extent of the cell.
    pub fn for_cell(geometry: &CellGeometry, degree: usize) -> Self {
        Self::with_frame(degree, geometry.centroid, geometry.frame)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// The matrix `A` of `ξ = A (x - c)`.
    pub fn frame(&self) -> [[f64; 2]; 2] {
        self.frame
    }

    /// Physical point with local coordinates `xi`.
    pub fn point_at(&self, xi: [f64; 2]) -> Point {
        let [[a, b], [c, d]] = self.frame;
        let det = a * d - b * c;
        [self.center[0] + (d * xi[0] - b * xi[1]) / det, self.center[1] + (a * xi[1] - c * xi[0]) / det]
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    /// Same center and frame, different degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        Self::with_frame(degree, self.center, self.frame)
    }

    #[inline]
    fn apply(&self, d: Point) -> (f64, f64) {
        let a = &self.frame;
        (a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1])
    }

    #[inline]
    fn local(&self, p: Point) -> (f64, f64) {
        self.apply([p[0] - self.center[0], p[1] - self.center[1]])
    }

    fn powers(&self, v: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree + 1);
        let mut acc = 1.0;
        for _ in 0..=self.degree {
            out.push(acc);
            acc *= v;
        }
        out
    }

    pub fn eval(&self, p: Point) -> Vec<f64> {
        let (x, y) = self.local(p);
        let (px, py) = (self.powers(x), self.powers(y));
        self.exps.iter().map(|&(a, b)| px[a] * py[b]).collect()
    }

    /// Values and physical gradients.
    pub fn eval_with_gradients(&self, p: Point) -> (Vec<f64>, Vec<[f64; 2]>) {
        let (x, y) = self.local(p);
        let (px, py) = (self.powers(x), self.powers(y));
        let f = &self.frame;
        let vals = self.exps.iter().map(|&(a, b)| px[a] * py[b]).collect();
        let grads = self
            .exps
            .iter()
            .map(|&(a, b)| {
                let dxi = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
                let deta = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
                [dxi * f[0][0] + deta * f[1][0], dxi * f[0][1] + deta * f[1][1]]
            })
            .collect();
        (vals, grads)
    }

    /// Evaluates `Σ_α c_α m_α(p)`.
    pub fn eval_poly(&self, coeffs: &[f64], p: Point) -> f64 {
        debug_assert!(coeffs.len() <= self.len());
        self.eval(p).iter().zip(coeffs).map(|(m, c)| m * c).sum()
    }

    /// Gradient of `Σ_α c_α m_α` at `p`.
    pub fn eval_poly_gradient(&self, coeffs: &[f64], p: Point) -> [f64; 2] {
        let (_, g) = self.eval_with_gradients(p);
        let mut out = [0.0; 2];
        for (gi, c) in g.iter().zip(coeffs) {
            out[0] += c * gi[0];
            out[1] += c * gi[1];
        }
        out
    }

    /// Coefficients of `Δm_α` in the degree-`(k-2)` basis with the same frame.
    /// Empty when `k < 2`.
    pub fn laplacian_coeffs(&self, alpha: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim_pk_minus(self.degree, 2)];
        let (a, b) = self.exps[alpha];
        let f = &self.frame;
        // Δ = |∇ξ|² ∂ξξ + 2 ∇ξ·∇η ∂ξη + |∇η|² ∂ηη
        let gxx = f[0][0] * f[0][0] + f[0][1] * f[0][1];
        let gxy = f[0][0] * f[1][0] + f[0][1] * f[1][1];
        let gyy = f[1][0] * f[1][0] + f[1][1] * f[1][1];
        if a >= 2 {
            out[monomial_index(a - 2, b)] += (a * (a - 1)) as f64 * gxx;
        }
        if a >= 1 && b >= 1 {
            out[monomial_index(a - 1, b - 1)] += 2.0 * (a * b) as f64 * gxy;
        }
        if b >= 2 {
            out[monomial_index(a, b - 2)] += (b * (b - 1)) as f64 * gyy;
        }
        out
    }

    /// Coefficients of `∂m_α/∂x` and `∂m_α/∂y` in the degree-`(k-1)` basis.
    pub fn gradient_coeffs(&self, alpha: usize) -> [Vec<f64>; 2] {
        let n = dim_pk_minus(self.degree, 1);
        let mut g = [vec![0.0; n], vec![0.0; n]];
        let (a, b) = self.exps[alpha];
        let f = &self.frame;
        for (comp, gc) in g.iter_mut().enumerate() {
            if a >= 1 {
                gc[monomial_index(a - 1, b)] += a as f64 * f[0][comp];
            }
            if b >= 1 {
                gc[monomial_index(a, b - 1)] += b as f64 * f[1][comp];
            }
        }
        g
    }

    /// Restriction of `m_α` to an edge as a polynomial in the edge coordinate `t`.
    pub fn restrict_to_edge(&self, alpha: usize, edge: &EdgeMonomialBasis) -> Vec<f64> {
        let (a, b) = self.exps[alpha];
        let (x0, y0) = self.local(edge.midpoint);
        let (dx, dy) = self.apply([edge.length * edge.tangent[0], edge.length * edge.tangent[1]]);
        let mut out = vec![1.0];
        for _ in 0..a {
            out = poly_mul(&out, &[x0, dx]);
        }
        for _ in 0..b {
            out = poly_mul(&out, &[y0, dy]);
        }
        out
    }
}

/// Scaled monomials `t^j`, `j < k`, on one edge in its canonical orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMonomialBasis {
    pub degree: usize,
    pub midpoint: Point,
    pub tangent: Point,
    pub length: f64,
}

impl EdgeMonomialBasis {
    /// Degree-`degree` basis on the segment `lo → hi`.
    pub fn new(lo: Point, hi: Point, degree: usize) -> Self {
        let length = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        Self {
            degree,
            midpoint: [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
            tangent: [(hi[0] - lo[0]) / length, (hi[1] - lo[1]) / length],
            length,
        }
    }

    pub fn for_edge(mesh: &PolyMesh, edge: usize, degree: usize) -> Self {
        let [lo, hi] = mesh.edge_points(edge);
        Self::new(lo, hi, degree)
    }

    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn param(&self, p: Point) -> f64 {
        ((p[0] - self.midpoint[0]) * self.tangent[0] + (p[1] - self.midpoint[1]) * self.tangent[1]) / self.length
    }

    pub fn eval(&self, p: Point) -> Vec<f64> {
        let t = self.param(p);
        let mut out = Vec::with_capacity(self.degree + 1);
        let mut acc = 1.0;
        for _ in 0..=self.degree {
            out.push(acc);
            acc *= t;
        }
        out
    }

    pub fn point_at(&self, t: f64) -> Point {
        [self.midpoint[0] + t * self.length * self.tangent[0], self.midpoint[1] + t * self.length * self.tangent[1]]
    }
}

/// Normalized moments `∫_{-1/2}^{1/2} p(t) t^j dt`, `j <= degree`, of a
/// polynomial given by ascending coefficients.
pub fn edge_moments_of_poly(coeffs: &[f64], degree: usize) -> Vec<f64> {
    (0..=degree).map(|j| coeffs.iter().enumerate().map(|(n, c)| c * unit_interval_moment(n + j)).sum()).collect()
}

/// Gram matrix of the edge monomials on `[-1/2, 1/2]` (normalized by `|e|`).
pub fn edge_gram(degree: usize) -> DMat {
    DMat::from_fn(degree + 1, degree + 1, |i, j| unit_interval_moment(i + j))
}

fn check_order(basis: &ScaledMonomialBasis, quad: &QuadratureRule, required: usize) -> Result<(), PolyError> {
    if quad.order < required {
        return Err(PolyError::QuadratureOrderTooLow { required, got: quad.order });
    }
    let _ = basis;
    Ok(())
}

/// `G[α][β] = ∫_E m_α m_β`.
pub fn gram_l2(basis: &ScaledMonomialBasis, quad: &QuadratureRule) -> Result<DMat, PolyError> {
    check_order(basis, quad, 2 * basis.degree())?;
    let n = basis.len();
    let mut g = DMat::zeros(n, n);
    for (&p, &w) in quad.points.iter().zip(&quad.weights) {
        let v = basis.eval(p);
        for i in 0..n {
            let wi = w * v[i];
            for j in i..n {
                g[(i, j)] += wi * v[j];
            }
        }
    }
    symmetrize_upper(&mut g);
    Ok(g)
}

/// `G[α][β] = ∫_E ∇m_α · ∇m_β`.
pub fn gram_grad(basis: &ScaledMonomialBasis, quad: &QuadratureRule) -> Result<DMat, PolyError> {
    check_order(basis, quad, 2 * basis.degree().saturating_sub(1))?;
    let n = basis.len();
    let mut g = DMat::zeros(n, n);
    for (&p, &w) in quad.points.iter().zip(&quad.weights) {
        let (_, gr) = basis.eval_with_gradients(p);
        for i in 1..n {
            for j in i..n {
                g[(i, j)] += w * (gr[i][0] * gr[j][0] + gr[i][1] * gr[j][1]);
            }
        }
    }
    symmetrize_upper(&mut g);
    Ok(g)
}

fn symmetrize_upper(g: &mut DMat) {
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
}

/// Moments `∫_E f m_α` by quadrature.
pub fn moments(f: impl Fn(Point) -> f64, basis: &ScaledMonomialBasis, quad: &QuadratureRule) -> Vec<f64> {
    let mut out = vec![0.0; basis.len()];
    for (&p, &w) in quad.points.iter().zip(&quad.weights) {
        let fv = w * f(p);
        for (o, m) in out.iter_mut().zip(basis.eval(p)) {
            *o += fv * m;
        }
    }
    out
}

/// Coefficients of the L2(E) projection of `f` onto `P_k(E)`.
pub fn project_l2(
    f: impl Fn(Point) -> f64,
    basis: &ScaledMonomialBasis,
    quad: &QuadratureRule,
) -> Result<Vec<f64>, PolyError> {
    let g = gram_l2(basis, quad)?;
    let rhs = moments(f, basis, quad);
    let chol = g.cholesky().map_err(|_| PolyError::SingularGram)?;
    Ok(chol.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, gen_quad_grid, polygon_quadrature, Domain};

    fn pentagon() -> PolyMesh {
        build_mesh(vec![[0.0, 0.0], [1.0, 0.1], [1.3, 0.8], [0.5, 1.2], [-0.2, 0.7]], vec![vec![0, 1, 2, 3, 4]])
            .unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_pk(0), 1);
        assert_eq!(dim_pk(2), 6);
        assert_eq!(dim_pk(3), 10);
        assert_eq!(dim_pk_minus(1, 2), 0);
        for k in 0..8 {
            let idx = multi_indices(k);
            assert_eq!(idx.len(), dim_pk(k));
            for (i, &(a, b)) in idx.iter().enumerate() {
                assert_eq!(monomial_index(a, b), i);
            }
        }
        assert_eq!(&multi_indices(2), &[(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
    }

    #[test]
    fn eval_examples() {
        let b = ScaledMonomialBasis::new(3, [0.5, 0.5], 2f64.sqrt());
        let (v, g) = b.eval_with_gradients([0.3, 0.9]);
        assert_eq!(v[0], 1.0);
        assert_eq!(g[0], [0.0, 0.0]);
        assert_eq!(b.eval([0.5, 0.5])[1], 0.0);
        // scaling sanity at the unit-square vertices
        for p in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
            assert!(b.eval(p).iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = ScaledMonomialBasis::new(2, [0.3, -0.2], 0.7);
        let alpha = monomial_index(1, 1);
        let eps = 1e-6;
        for p in [[0.1, 0.2], [0.7, -0.4], [-0.3, 0.5]] {
            let (_, g) = b.eval_with_gradients(p);
            let fx = (b.eval([p[0] + eps, p[1]])[alpha] - b.eval([p[0] - eps, p[1]])[alpha]) / (2.0 * eps);
            let fy = (b.eval([p[0], p[1] + eps])[alpha] - b.eval([p[0], p[1] - eps])[alpha]) / (2.0 * eps);
            assert!((g[alpha][0] - fx).abs() < 1e-7);
            assert!((g[alpha][1] - fy).abs() < 1e-7);
        }
    }

    #[test]
    fn laplacian_examples() {
        let h = 1.7;
        let b = ScaledMonomialBasis::new(4, [0.2, 0.1], h);
        assert!(b.laplacian_coeffs(monomial_index(1, 0)).iter().all(|&c| c == 0.0));
        let l = b.laplacian_coeffs(monomial_index(2, 0));
        assert!((l[0] - 2.0 / (h * h)).abs() < 1e-15);
        assert!(l[1..].iter().all(|&c| c == 0.0));
        // pointwise check for every degree-4 monomial against a direct second-derivative formula
        let low = b.with_degree(2);
        for (alpha, &(a, bb)) in b.exponents().iter().enumerate().filter(|(_, e)| e.0 + e.1 == 4) {
            let c = b.laplacian_coeffs(alpha);
            for p in [[0.3, 0.4], [-0.5, 1.0], [1.1, -0.2]] {
                let (x, y) = ((p[0] - 0.2) / h, (p[1] - 0.1) / h);
                let direct =
                    (if a >= 2 { (a * (a - 1)) as f64 * x.powi(a as i32 - 2) * y.powi(bb as i32) } else { 0.0 }
                        + if bb >= 2 {
                            (bb * (bb - 1)) as f64 * x.powi(a as i32) * y.powi(bb as i32 - 2)
                        } else {
                            0.0
                        })
                        / (h * h);
                assert!((low.eval_poly(&c, p) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_examples() {
        let m = gen_quad_grid(1, 1, Domain::UNIT_SQUARE).unwrap();
        let q = polygon_quadrature(&m, 0, 2).unwrap();
        let b0 = ScaledMonomialBasis::for_cell(m.geometry(0), 0);
        let g = gram_l2(&b0, &q).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
        let b1 = ScaledMonomialBasis::for_cell(m.geometry(0), 1);
        let gg = gram_grad(&b1, &q).unwrap();
        assert!(gg.row(0).iter().all(|&v| v == 0.0));
        // rank 2: the trailing 2x2 block is SPD
        let sub = gg.select(&[1, 2], &[1, 2]);
        assert!(sub.cholesky().is_ok());
    }

    #[test]
    fn gram_rejects_low_order() {
        let m = gen_quad_grid(1, 1, Domain::UNIT_SQUARE).unwrap();
        let q = polygon_quadrature(&m, 0, 2).unwrap();
        let b = ScaledMonomialBasis::for_cell(m.geometry(0), 2);
        assert_eq!(gram_l2(&b, &q), Err(PolyError::QuadratureOrderTooLow { required: 4, got: 2 }));
    }

    #[test]
    fn pentagon_gram_against_high_order() {
        let m = pentagon();
        let b = ScaledMonomialBasis::for_cell(m.geometry(0), 2);
        let g = gram_l2(&b, &polygon_quadrature(&m, 0, 4).unwrap()).unwrap();
        let oracle = gram_l2(&b, &polygon_quadrature(&m, 0, 16).unwrap()).unwrap();
        assert!(g.sub(&oracle).max_abs() < 1e-11);
    }

    #[test]
    fn projection_examples() {
        let m = pentagon();
        let b = ScaledMonomialBasis::for_cell(m.geometry(0), 2);
        let q = polygon_quadrature(&m, 0, 6).unwrap();
        for alpha in 0..b.len() {
            let c = project_l2(|p| b.eval(p)[alpha], &b, &q).unwrap();
            for (i, ci) in c.iter().enumerate() {
                let e = if i == alpha { 1.0 } else { 0.0 };
                assert!((ci - e).abs() < 1e-11, "alpha={alpha} i={i} c={ci}");
            }
        }
        assert!(project_l2(|_| 0.0, &b, &q).unwrap().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn edge_restriction_matches_pointwise() {
        let b = ScaledMonomialBasis::new(4, [0.4, 0.3], 0.9);
        let e = EdgeMonomialBasis::new([0.1, 0.0], [0.8, 0.6], 3);
        for alpha in 0..b.len() {
            let r = b.restrict_to_edge(alpha, &e);
            for t in [-0.5, -0.1, 0.3, 0.5] {
                let direct = b.eval(e.point_at(t))[alpha];
                let via: f64 = r.iter().enumerate().map(|(n, c)| c * t.powi(n as i32)).sum();
                assert!((direct - via).abs() < 1e-13);
            }
        }
        assert_eq!(e.eval(e.midpoint)[0], 1.0);
        assert_eq!(e.len(), 4);
    }
}
