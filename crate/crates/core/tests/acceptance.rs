//! Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.
//!
//! The lines go straight to stdout, so they show up even under output capture.

use std::io::Write as _;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use ncvem::assembly::{assemble, solve_stokes, SaddleSystem};
use ncvem::linsolve::{
    csr_from_triplets, singular_values_dense, solve_symmetric_indefinite, Backend, SolverConfig, SparseMatrixCSR,
};
use ncvem::mesh::{gauss_legendre, Domain, PolyMesh};
use ncvem::vemlocal::{dof_interpolate_vector, LocalVemElement};
use ncvem::verify::{convergence_study, error_norms, estimate_infsup, ManufacturedCase, MeshFamily, StudyConfig};
use ncvem::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, title: &str, failures: &[String], elapsed: Duration, budget: Duration) {
    let over = elapsed > budget;
    let status = if failures.is_empty() && !over { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ =
        writeln!(out, "criterion {id}: {status} {title} ({:.1}s, budget {}s)", elapsed.as_secs_f64(), budget.as_secs());
    for f in failures {
        let _ = writeln!(out, "    {f}");
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:#?}");
    assert!(!over, "criterion {id} exceeded its runtime budget");
}

fn patch_meshes() -> Vec<(&'static str, PolyMesh)> {
    let d = Domain::UNIT_SQUARE;
    vec![
        ("quad 8x8", MeshFamily::Quad.build(8, d).unwrap()),
        ("voronoi 64", MeshFamily::DEFAULT_VORONOI.build(64, d).unwrap()),
        ("distorted 8x8", MeshFamily::DEFAULT_DISTORTED.build(8, d).unwrap()),
    ]
}

/// Solves poly-k on every patch mesh and returns one message per miss.
fn patch_test(degrees: &[usize]) -> Vec<String> {
    let mut failures = Vec::new();
    for (name, mesh) in patch_meshes() {
        for &k in degrees {
            let case = ManufacturedCase::poly(k).unwrap();
            let s = assemble(&mesh, k, case.nu(), |p| case.load(p), |p| case.boundary(p)).unwrap();
            let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
            let e = error_norms(&mesh, &s, &sol, &case).unwrap();
            if !(e.e1 <= 1e-9 && e.e0 <= 1e-9 && e.ep <= 1e-9) {
                failures.push(format!("{name} k={k}: e1={:.3e} e0={:.3e} ep={:.3e}", e.e1, e.e0, e.ep));
            }
        }
    }
    failures
}

#[test]
fn criterion_1_patch_test() {
    let t = Instant::now();
    let failures = patch_test(&[1, 2, 3, 4, 5]);
    report(
        "1",
        "patch test k=1..5 on quad, Voronoi and distorted meshes",
        &failures,
        t.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_2_optimal_rates() {
    let t = Instant::now();
    let case = ManufacturedCase::trig();
    let cfg = StudyConfig::default();
    let mut failures = Vec::new();
    for (family, sizes) in [(MeshFamily::Quad, [8, 16, 32, 64]), (MeshFamily::DEFAULT_VORONOI, [64, 256, 1024, 4096])] {
        for k in [1usize, 2] {
            let r = convergence_study(&case, k, &family, &sizes, &cfg).unwrap();
            let [r1, r0, rp] = r.finest_rates().unwrap();
            let kf = k as f64;
            println!("    {} k={k}: rate e1={r1:.3} e0={r0:.3} ep={rp:.3}", family.name());
            if !(r1 >= kf - 0.15 && rp >= kf - 0.15 && r0 >= kf + 1.0 - 0.2) {
                failures.push(format!("{} k={k}: rates e1={r1:.3} e0={r0:.3} ep={rp:.3}", family.name()));
            }
        }
    }
    report("2", "optimal convergence of the trig case, k=1,2", &failures, t.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_3_parity() {
    let t = Instant::now();
    let failures = patch_test(&[2, 3]);
    report("3", "patch test for consecutive k=2 (even) and k=3 (odd)", &failures, t.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_4_inf_sup() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut betas = Vec::new();
    for n in [2, 4, 8] {
        let mesh = MeshFamily::Quad.build(n, Domain::UNIT_SQUARE).unwrap();
        let est = estimate_infsup(&mesh, 1, 1.0).unwrap();
        println!("    {n}x{n}: beta_h = {:.6}", est.beta);
        if est.beta <= 1e-3 {
            failures.push(format!("{n}x{n}: beta_h = {:e}", est.beta));
        }
        betas.push(est.beta);
    }
    let min = betas.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.5 * betas[0] {
        failures.push(format!("min beta_h {min:.6} < 0.5 x coarsest {:.6}", betas[0]));
    }
    report("4", "inf-sup constant on 2x2, 4x4, 8x8 quads, k=1", &failures, t.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_5_divergence_free() {
    let t = Instant::now();
    let d = Domain::UNIT_SQUARE;
    let case = ManufacturedCase::trig();
    let mut failures = Vec::new();
    let mut meshes: Vec<(String, PolyMesh)> = Vec::new();
    for n in [8, 16, 32] {
        meshes.push((format!("quad {n}"), MeshFamily::Quad.build(n, d).unwrap()));
    }
    for n in [64, 256, 1024] {
        meshes.push((format!("voronoi {n}"), MeshFamily::DEFAULT_VORONOI.build(n, d).unwrap()));
    }
    for n in [8, 16] {
        meshes.push((format!("distorted {n}"), MeshFamily::DEFAULT_DISTORTED.build(n, d).unwrap()));
    }
    for (name, mesh) in &meshes {
        for k in 1..=3 {
            let s = assemble(mesh, k, 1.0, |p| case.load(p), |p| case.boundary(p)).unwrap();
            let sol = solve_stokes(&s, &SolverConfig::default()).unwrap();
            let defect = sol.divergence_defect(&s);
            if defect > 1e-9 {
                failures.push(format!("{name} k={k}: ||B u_h||_inf = {defect:.3e}"));
            }
        }
    }
    report(
        "5",
        "||B u_h||_inf <= 1e-9 for homogeneous-boundary solves",
        &failures,
        t.elapsed(),
        Duration::from_secs(120),
    );
}

/// Counter-clockwise polygon; convex ones lie on a rotated ellipse, the
/// others are star-shaped with strongly varying radii.
fn random_polygon(rng: &mut ChaCha8Rng, convex: bool) -> Vec<Point> {
    let n = rng.gen_range(3..=10);
    let mut angles: Vec<f64> = Vec::new();
    while angles.len() < n {
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        if angles.iter().all(|&b: &f64| {
            let d = (a - b).abs();
            d.min(std::f64::consts::TAU - d) > 0.25
        }) {
            angles.push(a);
        }
    }
    angles.sort_by(f64::total_cmp);
    let (ax, ay, rot) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5), rng.gen_range(0.0..3.2f64));
    let scale = 10f64.powf(rng.gen_range(-2.0..0.5));
    let shift = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
    angles
        .iter()
        .map(|&a| {
            let r = if convex { 1.0 } else { rng.gen_range(0.25..1.0) };
            let (x, y) = (ax * r * a.cos(), ay * r * a.sin());
            let (c, s) = (rot.cos(), rot.sin());
            [shift[0] + scale * (c * x - s * y), shift[1] + scale * (s * x + c * y)]
        })
        .collect()
}

fn is_convex(p: &[Point]) -> bool {
    let n = p.len();
    (0..n).all(|i| {
        let (a, b, c) = (p[i], p[(i + 1) % n], p[(i + 2) % n]);
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
    })
}

/// `∫_P f` by a signed fan of Duffy-mapped Gauss rules from the first vertex.
fn fan_integral(p: &[Point], f: impl Fn(Point) -> f64) -> f64 {
    let (x, w) = gauss_legendre(12);
    let o = p[0];
    let mut total = 0.0;
    for i in 1..p.len() - 1 {
        let (a, b) = (p[i], p[i + 1]);
        let jac = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        for (xi, wi) in x.iter().zip(&w) {
            for (xj, wj) in x.iter().zip(&w) {
                let (u, v) = (0.5 * (xi + 1.0), 0.5 * (xj + 1.0));
                let (s, t) = (u, v * (1.0 - u));
                let q = [o[0] + s * (a[0] - o[0]) + t * (b[0] - o[0]), o[1] + s * (a[1] - o[1]) + t * (b[1] - o[1])];
                total += 0.25 * wi * wj * (1.0 - u) * jac * f(q);
            }
        }
    }
    total
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn to_na(m: &ncvem::dense::DMat) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.nrows(), m.ncols(), m.as_slice())
}

#[test]
fn criterion_6_local_invariants() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut polygons = Vec::new();
    while polygons.iter().filter(|p: &&Vec<Point>| is_convex(p)).count() < 30 {
        polygons.push(random_polygon(&mut rng, true));
    }
    while polygons.iter().filter(|p| !is_convex(p)).count() < 30 {
        let p = random_polygon(&mut rng, false);
        if !is_convex(&p) {
            polygons.push(p);
        }
    }
    let nu = 0.7;
    for (pi, poly) in polygons.iter().enumerate() {
        let mesh = PolyMesh::new(poly.clone(), vec![(0..poly.len()).collect()]).unwrap();
        for k in 1..=5 {
            let tag = format!("polygon {pi} ({} vertices, convex={}) k={k}", poly.len(), is_convex(poly));
            let el = LocalVemElement::new(&mesh, 0, k, nu).unwrap();
            let d = to_na(&el.dof_of_poly);
            let nk = d.ncols();

            let sv = d.clone().svd(false, false).singular_values;
            let (smin, smax) = (sv.min(), sv.max());
            if smin.is_nan() || smin <= 1e-10 * smax {
                failures.push(format!("{tag}: D rank deficient, sigma {smin:.3e}/{smax:.3e}"));
            }

            let pd = to_na(&el.projector) * &d;
            let e = max_abs_diff(&pd, &DMatrix::identity(nk, nk));
            if e > 1e-12 {
                failures.push(format!("{tag}: |PD - I| = {e:.3e}"));
            }

            let g = to_na(&el.gram_grad);
            let dad = d.transpose() * to_na(&el.stiffness) * &d;
            let e = max_abs_diff(&dad, &(&g * nu)) / g.abs().max().max(1.0);
            if e > 1e-11 {
                failures.push(format!("{tag}: |D^T A D - nu G| = {e:.3e}"));
            }

            let s = to_na(&el.stabilization);
            let e = (&s * &d).abs().max() / s.abs().max().max(1.0);
            if e > 1e-11 {
                failures.push(format!("{tag}: |S D| = {e:.3e}"));
            }
            let eig = nalgebra::SymmetricEigen::new(0.5 * (&s + s.transpose())).eigenvalues;
            if eig.min() < -1e-12 * s.abs().max() {
                failures.push(format!("{tag}: S not semidefinite, min eigenvalue {:.3e}", eig.min()));
            }

            // b_h^E on a random polynomial velocity against a direct area integral
            let cx: Vec<f64> = (0..nk).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cy: Vec<f64> = (0..nk).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = &el.basis;
            let v = |p: Point| [b.eval_poly(&cx, p), b.eval_poly(&cy, p)];
            let dofs = dof_interpolate_vector(&mesh, 0, k, v).unwrap();
            let bv = el.divergence.matvec(&dofs);
            let pb = el.pressure_basis();
            for (r, got) in bv.iter().enumerate() {
                let exact = fan_integral(poly, |p| {
                    let div = b.eval_poly_gradient(&cx, p)[0] + b.eval_poly_gradient(&cy, p)[1];
                    pb.eval(p)[r] * div
                });
                let inv_len = b.frame().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let scale = fan_integral(poly, |p| pb.eval(p)[r].abs()) * inv_len;
                if (got - exact).abs() > 1e-11 * scale.max(f64::MIN_POSITIVE) {
                    failures.push(format!("{tag}: b row {r}: {got:.15e} vs {exact:.15e}"));
                }
            }
        }
    }
    let title = format!("local invariants on {} random polygons, k=1..5", polygons.len());
    report("6", &title, &failures, t.elapsed(), Duration::from_secs(60));
}

fn assembled_systems() -> Vec<(String, SaddleSystem)> {
    let d = Domain::UNIT_SQUARE;
    let trig = ManufacturedCase::trig();
    let mut out = Vec::new();
    let mut push = |name: String, mesh: PolyMesh, k: usize, case: &ManufacturedCase| {
        let s = assemble(&mesh, k, case.nu(), |p| case.load(p), |p| case.boundary(p)).unwrap();
        if s.matrix.nrows() <= 5000 {
            out.push((format!("{name} k={k} {}", case.name()), s));
        }
    };
    for k in 1..=3 {
        for n in [4, 8, 16] {
            push(format!("quad {n}"), MeshFamily::Quad.build(n, d).unwrap(), k, &trig);
        }
        for n in [16, 64, 256] {
            push(format!("voronoi {n}"), MeshFamily::DEFAULT_VORONOI.build(n, d).unwrap(), k, &trig);
        }
        push("distorted 8".into(), MeshFamily::DEFAULT_DISTORTED.build(8, d).unwrap(), k, &trig);
        let poly = ManufacturedCase::poly(k).unwrap();
        push("voronoi 64".into(), MeshFamily::DEFAULT_VORONOI.build(64, d).unwrap(), k, &poly);
    }
    out
}

fn random_triplets(rng: &mut ChaCha8Rng, rows: usize, cols: usize, count: usize) -> Vec<(usize, usize, f64)> {
    (0..count).map(|_| (rng.gen_range(0..rows), rng.gen_range(0..cols), rng.gen_range(-1.0..1.0))).collect()
}

fn dense_oracle(triplets: &[(usize, usize, f64)], rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for &(i, j, v) in triplets {
        m[(i, j)] += v;
    }
    m
}

fn csr_to_na(a: &SparseMatrixCSR) -> DMatrix<f64> {
    to_na(&a.to_dense())
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    num / b.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(f64::MIN_POSITIVE)
}

/// Random symmetric saddle system `[[A, Bᵀ], [B, 0]]` with SPD `A` and full-rank `B`.
fn random_saddle(rng: &mut ChaCha8Rng, nu: usize, np: usize) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for i in 0..nu {
        t.push((i, i, 4.0 + rng.gen_range(0.0..1.0)));
        for _ in 0..3 {
            let j = rng.gen_range(0..nu);
            if j != i {
                let v = rng.gen_range(-0.5..0.5);
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
    }
    for r in 0..np {
        // the diagonal-dominant column keeps B full rank
        t.push((nu + r, r, 1.0));
        t.push((r, nu + r, 1.0));
        for _ in 0..4 {
            let c = rng.gen_range(0..nu);
            let v = rng.gen_range(-1.0..1.0);
            t.push((nu + r, c, v));
            t.push((c, nu + r, v));
        }
    }
    t
}

#[test]
fn criterion_7_solver_correctness() {
    let t = Instant::now();
    let mut failures = Vec::new();

    // backend agreement on assembled systems
    let tight = 1e-12;
    let direct = SolverConfig { backend: Backend::Direct, tol: tight, ..Default::default() };
    let iterative = SolverConfig { backend: Backend::Iterative, tol: tight, ..Default::default() };
    let systems = assembled_systems();
    for (name, s) in &systems {
        let xd = solve_symmetric_indefinite(&s.matrix, &s.rhs, &direct).unwrap().x;
        match solve_symmetric_indefinite(&s.matrix, &s.rhs, &iterative) {
            Ok(xi) => {
                let e = rel_diff(&xi.x, &xd);
                if e > 1e-8 {
                    failures.push(format!("{name}: direct vs iterative {e:.3e}"));
                }
            }
            Err(err) => failures.push(format!("{name}: iterative solve failed: {err}")),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // triplet assembly with duplicates, exact against dense accumulation in input order
    let trip = random_triplets(&mut rng, 50, 50, 600);
    let a = csr_from_triplets(50, 50, &trip).unwrap();
    if csr_to_na(&a) != dense_oracle(&trip, 50, 50) {
        failures.push("50x50 triplet assembly differs from the dense oracle".into());
    }

    for (rows, cols) in [(30, 30), (200, 200), (120, 45)] {
        let trip = random_triplets(&mut rng, rows, cols, rows * cols / 4);
        let a = csr_from_triplets(rows, cols, &trip).unwrap();
        let x: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = a.matvec(&x).unwrap();
        let oracle = dense_oracle(&trip, rows, cols) * DVector::from_vec(x);
        let e = rel_diff(&y, oracle.as_slice());
        if e > 1e-13 {
            failures.push(format!("{rows}x{cols} matvec differs from the dense oracle by {e:.3e}"));
        }
    }

    for (nu, np) in [(60, 20), (150, 50)] {
        let trip = random_saddle(&mut rng, nu, np);
        let n = nu + np;
        let k = csr_from_triplets(n, n, &trip).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let oracle = dense_oracle(&trip, n, n).lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for cfg in [&direct, &iterative] {
            let x = solve_symmetric_indefinite(&k, &b, cfg).unwrap().x;
            let e = rel_diff(&x, oracle.as_slice());
            if e > 1e-9 {
                failures.push(format!("{n}x{n} saddle solve ({:?}) differs from dense LU by {e:.3e}", cfg.backend));
            }
        }
    }

    let m = DMatrix::from_fn(40, 20, |_, _| rng.gen_range(-1.0..1.0));
    let ours = singular_values_dense(&ncvem::dense::DMat::from_fn(40, 20, |i, j| m[(i, j)])).unwrap();
    let mut oracle: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    oracle.sort_by(|a, b| b.total_cmp(a));
    let e = rel_diff(&ours, &oracle);
    if e > 1e-10 {
        failures.push(format!("40x20 singular values differ from the dense oracle by {e:.3e}"));
    }

    let title = format!("backend agreement on {} assembled systems and dense oracles", systems.len());
    report("7", &title, &failures, t.elapsed(), Duration::from_secs(120));
}
