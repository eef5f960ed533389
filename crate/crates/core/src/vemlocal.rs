//! Local nonconforming virtual element space on one polygonal cell.
//!
//! Scalar degrees of freedom, in local order:
//!
//! * for each local edge `e` (loop order) and `j < k`: `(1/|e|) ∫_e v t^j ds`,
//!   with `t` the canonical edge coordinate of [`EdgeMonomialBasis`];
//! * for each `|β| <= k-2`: `(1/|E|) ∫_E v m_β dx`.
//!
//! Velocity degrees of freedom stack the two components: `[u_x dofs, u_y dofs]`.
//! Everything below is computed from these functionals only; no virtual
//! basis function is ever evaluated pointwise.

use crate::dense::DMat;
use crate::mesh::{edge_quadrature, polygon_quadrature, MeshError, PolyMesh, QuadratureRule};
use crate::poly::{
    dim_pk_minus, edge_moments_of_poly, gram_grad, gram_l2, moments, project_l2, EdgeMonomialBasis, PolyError,
    ScaledMonomialBasis,
};
use crate::{Point, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VemError {
    #[error("polynomial degree {0} is outside the supported range 1..={MAX_DEGREE}")]
    UnsupportedDegree(usize),
    #[error("energy projector system is singular on cell {cell}")]
    SingularProjectorSystem { cell: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// How the load functional `∫_E f · v` is approximated from the degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadForm {
    /// `∫_E f · Π̂ v`, where `Π̂ v ∈ P_k` takes its moments of degree `<= k-2`
    /// from the interior degrees of freedom and the remaining ones from the
    /// energy projection. Exact for loads in `P_{k-2}`.
    #[default]
    ProjectedTest,
    /// `∫_E f · Π^∇ v` with the plain energy projector.
    EnergyProjectedTest,
    /// `∫_E (Π^0_{k-2} f) · v`; for `k = 1` the cell mean of `f` against the
    /// boundary mean of `v`.
    ProjectedSource,
}

/// Counts of local degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub degree: usize,
    pub n_cell_edges: usize,
    /// `#edges · k` edge moments per scalar component.
    pub n_edge_dofs: usize,
    /// `dim P_{k-2}` interior moments per scalar component.
    pub n_cell_dofs: usize,
    /// Pressure basis size, `dim P_{k-1}`.
    pub n_pressure: usize,
}

impl DofLayout {
    pub fn new(n_cell_edges: usize, degree: usize) -> Self {
        Self {
            degree,
            n_cell_edges,
            n_edge_dofs: n_cell_edges * degree,
            n_cell_dofs: dim_pk_minus(degree, 2),
            n_pressure: dim_pk_minus(degree, 1),
        }
    }

    pub fn n_scalar(&self) -> usize {
        self.n_edge_dofs + self.n_cell_dofs
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_scalar()
    }

    /// Local index of edge moment `j` on local edge `i`.
    pub fn edge_dof(&self, i: usize, j: usize) -> usize {
        i * self.degree + j
    }

    pub fn cell_dof(&self, beta: usize) -> usize {
        self.n_edge_dofs + beta
    }
}

fn check_degree(k: usize) -> Result<(), VemError> {
    if (1..=MAX_DEGREE).contains(&k) {
        Ok(())
    } else {
        Err(VemError::UnsupportedDegree(k))
    }
}

/// Quadrature order used for the local matrices and loads.
pub fn default_quadrature_order(k: usize) -> usize {
    2 * k + 2
}

fn edge_bases(mesh: &PolyMesh, cell: usize, k: usize) -> Vec<EdgeMonomialBasis> {
    mesh.cell_edges(cell).iter().map(|&(e, _)| EdgeMonomialBasis::for_edge(mesh, e, k - 1)).collect()
}

/// Edge moments `(1/|e|) ∫_e f t^j ds`, `j < k`, of a scalar function.
pub fn edge_dof_interpolate(mesh: &PolyMesh, edge: usize, k: usize, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let eb = EdgeMonomialBasis::for_edge(mesh, edge, k - 1);
    let [a, b] = mesh.edge_points(edge);
    let q = edge_quadrature(a, b, 2 * k + 12);
    let mut out = vec![0.0; k];
    for (&p, &w) in q.points.iter().zip(&q.weights) {
        let fw = f(p) * w / eb.length;
        for (o, t) in out.iter_mut().zip(eb.eval(p)) {
            *o += fw * t;
        }
    }
    out
}

/// Degrees of freedom of a scalar function on a cell.
pub fn dof_interpolate(mesh: &PolyMesh, cell: usize, k: usize, f: impl Fn(Point) -> f64) -> Result<Vec<f64>, VemError> {
    check_degree(k)?;
    let geo = mesh.geometry(cell);
    let layout = DofLayout::new(mesh.cell(cell).len(), k);
    let mut dofs = vec![0.0; layout.n_scalar()];
    for (i, &(e, _)) in mesh.cell_edges(cell).iter().enumerate() {
        for (j, v) in edge_dof_interpolate(mesh, e, k, &f).into_iter().enumerate() {
            dofs[layout.edge_dof(i, j)] = v;
        }
    }
    if layout.n_cell_dofs > 0 {
        let basis = ScaledMonomialBasis::for_cell(geo, k - 2);
        let q = polygon_quadrature(mesh, cell, 2 * k + 12)?;
        let m = moments(f, &basis, &q);
        for (beta, v) in m.into_iter().enumerate() {
            dofs[layout.cell_dof(beta)] = v / geo.area;
        }
    }
    Ok(dofs)
}

/// Degrees of freedom of a vector field, components stacked.
pub fn dof_interpolate_vector(
    mesh: &PolyMesh,
    cell: usize,
    k: usize,
    f: impl Fn(Point) -> [f64; 2],
) -> Result<Vec<f64>, VemError> {
    let mut out = dof_interpolate(mesh, cell, k, |p| f(p)[0])?;
    out.extend(dof_interpolate(mesh, cell, k, |p| f(p)[1])?);
    Ok(out)
}

/// All local operators of the nonconforming virtual element on one cell.
#[derive(Debug, Clone)]
pub struct LocalVemElement {
    pub cell: usize,
    pub degree: usize,
    pub nu: f64,
    pub layout: DofLayout,
    pub basis: ScaledMonomialBasis,
    pub area: f64,
    pub perimeter: f64,
    /// Degrees of freedom of the basis monomials, `n_scalar × dim P_k`.
    pub dof_of_poly: DMat,
    /// Energy projector, scalar dofs → `P_k` coefficients.
    pub projector: DMat,
    /// L2-type projector (low moments from the interior dofs), scalar dofs → `P_k` coefficients.
    pub l2_projector: DMat,
    pub gram_grad: DMat,
    pub gram_l2: DMat,
    /// `ν (I - DΠ)ᵀ (I - DΠ)` on the scalar dofs.
    pub stabilization: DMat,
    /// Scalar stiffness `ν Πᵀ G Π + S`.
    pub stiffness: DMat,
    /// `∫_E q div v`, rows pressure basis, columns velocity dofs.
    pub divergence: DMat,
    /// Gram matrix of the pressure basis.
    pub pressure_mass: DMat,
    /// 1-norm condition estimate of the projector system.
    pub projector_condition: f64,
    quad: QuadratureRule,
}

impl LocalVemElement {
    pub fn new(mesh: &PolyMesh, cell: usize, k: usize, nu: f64) -> Result<Self, VemError> {
        check_degree(k)?;
        let geo = mesh.geometry(cell);
        let layout = DofLayout::new(mesh.cell(cell).len(), k);
        let basis = ScaledMonomialBasis::for_cell(geo, k);
        let nk = basis.len();
        let ns = layout.n_scalar();
        let quad = polygon_quadrature(mesh, cell, default_quadrature_order(k))?;
        let edges = edge_bases(mesh, cell, k);
        let perimeter = geo.perimeter();

        let g_l2 = gram_l2(&basis, &quad)?;
        let g_grad = gram_grad(&basis, &quad)?;

        // D: dofs of each monomial, from exact edge restrictions and the L2 Gram
        let mut d = DMat::zeros(ns, nk);
        for alpha in 0..nk {
            for (i, eb) in edges.iter().enumerate() {
                let mom = edge_moments_of_poly(&basis.restrict_to_edge(alpha, eb), k - 1);
                for (j, v) in mom.into_iter().enumerate() {
                    d[(layout.edge_dof(i, j), alpha)] = v;
                }
            }
            for beta in 0..layout.n_cell_dofs {
                d[(layout.cell_dof(beta), alpha)] = g_l2[(beta, alpha)] / geo.area;
            }
        }

        // R: right-hand side of the projector system by integration by parts;
        // row 0 fixes the constant through the boundary mean
        let mut rhs = DMat::zeros(nk, ns);
        for (i, eb) in edges.iter().enumerate() {
            rhs[(0, layout.edge_dof(i, 0))] = eb.length / perimeter;
        }
        let lower = basis.with_degree(k - 1);
        for alpha in 1..nk {
            let lap = basis.laplacian_coeffs(alpha);
            for (beta, c) in lap.into_iter().enumerate() {
                rhs[(alpha, layout.cell_dof(beta))] -= c * geo.area;
            }
            let grad = basis.gradient_coeffs(alpha);
            for (i, eb) in edges.iter().enumerate() {
                let n = geo.normals[i];
                // ∂m_α/∂n in the degree k-1 basis, restricted to the edge
                let mut dn = vec![0.0; k];
                for (beta, (gx, gy)) in grad[0].iter().zip(&grad[1]).enumerate() {
                    let c = n[0] * gx + n[1] * gy;
                    if c != 0.0 {
                        for (o, r) in dn.iter_mut().zip(lower.restrict_to_edge(beta, eb)) {
                            *o += c * r;
                        }
                    }
                }
                for (j, c) in dn.into_iter().enumerate() {
                    rhs[(alpha, layout.edge_dof(i, j))] += c * eb.length;
                }
            }
        }
        // D = Q T with orthonormal Q; Π = T⁻¹ (R Q)⁻¹ R keeps the graded
        // monomial scaling inside the triangular factor
        let (q, t) = thin_qr(&d).ok_or(VemError::SingularProjectorSystem { cell })?;
        let rq = rhs.matmul(&q);
        let projector_condition = rhs.matmul(&d).condition_estimate();
        if projector_condition > 1e12 {
            log::warn!("cell {cell}: projector system condition estimate {projector_condition:.3e}");
        }
        let y = rq.lu().map_err(|_| VemError::SingularProjectorSystem { cell })?.solve_mat(&rhs);
        let projector = solve_upper(&t, &y);

        let i_minus_dp = DMat::identity(ns).sub(&d.matmul(&projector));
        // Π̂ = Π + G⁻¹ E: E corrects the low moments of Π to the interior dofs,
        // and vanishes on polynomials
        let l2_projector = if layout.n_cell_dofs == 0 {
            projector.clone()
        } else {
            let mut e = DMat::zeros(nk, ns);
            for beta in 0..layout.n_cell_dofs {
                for (o, v) in e.row_mut(beta).iter_mut().zip(i_minus_dp.row(layout.cell_dof(beta))) {
                    *o = geo.area * v;
                }
            }
            let corr = g_l2.cholesky().map_err(|_| VemError::Poly(PolyError::SingularGram))?.solve_mat(&e);
            projector.add(&corr)
        };

        let stabilization = i_minus_dp.tr_matmul(&i_minus_dp).scaled(nu);
        let consistency = projector.tr_matmul(&g_grad.matmul(&projector));
        // symmetrized so the assembled matrix is symmetric bit for bit
        let consistency = consistency.add(&consistency.transpose()).scaled(0.5);
        let stiffness = consistency.scaled(nu).add(&stabilization);

        let pbasis = basis.with_degree(k - 1);
        let np = layout.n_pressure;
        let mut divergence = DMat::zeros(np, 2 * ns);
        for r in 0..np {
            for (i, eb) in edges.iter().enumerate() {
                let n = geo.normals[i];
                // q has degree <= k-1 so its trace is tested exactly by the edge moments
                let tr = basis.restrict_to_edge(r, eb);
                for (j, c) in tr.into_iter().enumerate() {
                    for comp in 0..2 {
                        divergence[(r, comp * ns + layout.edge_dof(i, j))] += n[comp] * c * eb.length;
                    }
                }
            }
            let grads = pbasis.gradient_coeffs(r);
            for (comp, g) in grads.iter().enumerate() {
                for (beta, c) in g.iter().enumerate() {
                    divergence[(r, comp * ns + layout.cell_dof(beta))] -= c * geo.area;
                }
            }
        }
        let pressure_mass = g_l2.select(&(0..np).collect::<Vec<_>>(), &(0..np).collect::<Vec<_>>());

        Ok(Self {
            cell,
            degree: k,
            nu,
            layout,
            basis,
            area: geo.area,
            perimeter,
            dof_of_poly: d,
            projector,
            l2_projector,
            gram_grad: g_grad,
            gram_l2: g_l2,
            stabilization,
            stiffness,
            divergence,
            pressure_mass,
            projector_condition,
            quad,
        })
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn pressure_basis(&self) -> ScaledMonomialBasis {
        self.basis.with_degree(self.degree - 1)
    }

    /// Block-diagonal two-component stiffness `A_E`.
    pub fn velocity_stiffness(&self) -> DMat {
        let ns = self.layout.n_scalar();
        let mut a = DMat::zeros(2 * ns, 2 * ns);
        for comp in 0..2 {
            for i in 0..ns {
                for j in 0..ns {
                    a[(comp * ns + i, comp * ns + j)] = self.stiffness[(i, j)];
                }
            }
        }
        a
    }

    /// `∫_E q` for each pressure basis function.
    pub fn pressure_integrals(&self) -> Vec<f64> {
        self.pressure_mass.row(0).to_vec()
    }

    /// Applies the energy projector to scalar dofs.
    pub fn project(&self, scalar_dofs: &[f64]) -> Vec<f64> {
        self.projector.matvec(scalar_dofs)
    }

    /// Load vector for the velocity dofs of this cell, components stacked.
    pub fn load(&self, mesh: &PolyMesh, f: impl Fn(Point) -> [f64; 2], form: LoadForm) -> Result<Vec<f64>, VemError> {
        let ns = self.layout.n_scalar();
        let mut out = vec![0.0; 2 * ns];
        match form {
            LoadForm::ProjectedTest | LoadForm::EnergyProjectedTest => {
                let proj = if form == LoadForm::ProjectedTest { &self.l2_projector } else { &self.projector };
                let mut fm = [vec![0.0; self.basis.len()], vec![0.0; self.basis.len()]];
                for (&p, &w) in self.quad.points.iter().zip(&self.quad.weights) {
                    let fv = f(p);
                    for (alpha, m) in self.basis.eval(p).into_iter().enumerate() {
                        fm[0][alpha] += w * fv[0] * m;
                        fm[1][alpha] += w * fv[1] * m;
                    }
                }
                for comp in 0..2 {
                    for (i, v) in proj.tr_matvec(&fm[comp]).into_iter().enumerate() {
                        out[comp * ns + i] = v;
                    }
                }
            }
            LoadForm::ProjectedSource => {
                let k = self.degree;
                if k >= 2 {
                    let low = self.basis.with_degree(k - 2);
                    for comp in 0..2 {
                        let c = project_l2(|p| f(p)[comp], &low, &self.quad)?;
                        for (beta, v) in c.into_iter().enumerate() {
                            out[comp * ns + self.layout.cell_dof(beta)] = v * self.area;
                        }
                    }
                } else {
                    let mean = {
                        let mut m = [0.0; 2];
                        for (&p, &w) in self.quad.points.iter().zip(&self.quad.weights) {
                            let fv = f(p);
                            m[0] += w * fv[0];
                            m[1] += w * fv[1];
                        }
                        m
                    };
                    let lengths = &mesh.geometry(self.cell).edge_lengths;
                    for comp in 0..2 {
                        for (i, len) in lengths.iter().enumerate() {
                            out[comp * ns + self.layout.edge_dof(i, 0)] = mean[comp] * len / self.perimeter;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Thin QR factorization by twice-iterated modified Gram–Schmidt.
fn thin_qr(a: &DMat) -> Option<(DMat, DMat)> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut q = a.clone();
    let mut t = DMat::zeros(n, n);
    for j in 0..n {
        let norm0 = (0..m).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        for _ in 0..2 {
            for p in 0..j {
                let dot: f64 = (0..m).map(|i| q[(i, p)] * q[(i, j)]).sum();
                t[(p, j)] += dot;
                for i in 0..m {
                    q[(i, j)] -= dot * q[(i, p)];
                }
            }
        }
        let norm = (0..m).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        if norm <= 1e-13 * norm0 || norm == 0.0 {
            return None;
        }
        t[(j, j)] = norm;
        for i in 0..m {
            q[(i, j)] /= norm;
        }
    }
    Some((q, t))
}

/// Solves `T X = Y` for upper-triangular `T`.
fn solve_upper(t: &DMat, y: &DMat) -> DMat {
    let n = t.nrows();
    let mut x = y.clone();
    for c in 0..y.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for j in i + 1..n {
                s -= t[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = s / t[(i, i)];
        }
    }
    x
}
