//! Manufactured Stokes solutions with analytic loads.

use std::f64::consts::PI;

use super::VerifyError;
use crate::mesh::Domain;
use crate::{Point, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Divergence-free velocity in `(P_k)²`, pressure in `P_{k-1}`.
    Poly(usize),
    /// `ψ = sin²(πx) sin²(πy)`, `p = sin(2πx) sin(2πy)`.
    Trig,
}

/// An exact solution `(u, p)` of `-ν Δu + ∇p = f`, `div u = 0`, `u = g` on the boundary.
///
/// Velocities come from a stream function, `u = (∂ψ/∂y, -∂ψ/∂x)`, so they
/// are divergence free by construction; pressures have zero mean on the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    name: String,
    nu: f64,
    domain: Domain,
    kind: Kind,
}

/// `x^n`, zero for negative `n`.
fn pw(x: f64, n: i64) -> f64 {
    if n < 0 {
        0.0
    } else {
        x.powi(n as i32)
    }
}

impl ManufacturedCase {
    /// `poly-k`: `ψ = (y^{k+1} - x^{k+1})/(k+1) + [k >= 2] x^{k-1} y²`,
    /// `p = 0` for `k = 1` and `x^{k-1} + y^{k-1} - 2/k` otherwise.
    pub fn poly(k: usize) -> Result<Self, VerifyError> {
        if !(1..=MAX_DEGREE).contains(&k) {
            return Err(VerifyError::UnknownCase(format!("poly-{k}")));
        }
        Ok(Self { name: format!("poly-{k}"), nu: 1.0, domain: Domain::UNIT_SQUARE, kind: Kind::Poly(k) })
    }

    pub fn trig() -> Self {
        Self { name: "trig".into(), nu: 1.0, domain: Domain::UNIT_SQUARE, kind: Kind::Trig }
    }

    /// Same case with another viscosity; the load follows.
    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Polynomial degree of the velocity, if it is a polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self.kind {
            Kind::Poly(k) => Some(k),
            Kind::Trig => None,
        }
    }

    pub fn velocity(&self, p: Point) -> [f64; 2] {
        let [x, y] = p;
        match self.kind {
            Kind::Poly(k) => {
                let k = k as i64;
                let s = if k >= 2 { 1.0 } else { 0.0 };
                let kf = k as f64;
                [pw(y, k) + s * 2.0 * pw(x, k - 1) * y, pw(x, k) - s * (kf - 1.0) * pw(x, k - 2) * y * y]
            }
            Kind::Trig => {
                let (s, ds, _, _) = trig_factors(x);
                let (t, dt, _, _) = trig_factors(y);
                [s * dt, -ds * t]
            }
        }
    }

    /// `[[∂u₁/∂x, ∂u₁/∂y], [∂u₂/∂x, ∂u₂/∂y]]`.
    pub fn velocity_gradient(&self, p: Point) -> [[f64; 2]; 2] {
        let [x, y] = p;
        match self.kind {
            Kind::Poly(k) => {
                let ki = k as i64;
                let s = if k >= 2 { 1.0 } else { 0.0 };
                let kf = k as f64;
                let a = s * 2.0 * (kf - 1.0) * pw(x, ki - 2) * y;
                [
                    [a, kf * pw(y, ki - 1) + s * 2.0 * pw(x, ki - 1)],
                    [kf * pw(x, ki - 1) - s * (kf - 1.0) * (kf - 2.0) * pw(x, ki - 3) * y * y, -a],
                ]
            }
            Kind::Trig => {
                let (s, ds, d2s, _) = trig_factors(x);
                let (t, dt, d2t, _) = trig_factors(y);
                [[ds * dt, s * d2t], [-d2s * t, -ds * dt]]
            }
        }
    }

    pub fn pressure(&self, p: Point) -> f64 {
        let [x, y] = p;
        match self.kind {
            Kind::Poly(1) => 0.0,
            Kind::Poly(k) => pw(x, k as i64 - 1) + pw(y, k as i64 - 1) - 2.0 / k as f64,
            Kind::Trig => (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
        }
    }

    pub fn pressure_gradient(&self, p: Point) -> [f64; 2] {
        let [x, y] = p;
        match self.kind {
            Kind::Poly(k) => {
                let kf = k as f64;
                [(kf - 1.0) * pw(x, k as i64 - 2), (kf - 1.0) * pw(y, k as i64 - 2)]
            }
            Kind::Trig => {
                let w = 2.0 * PI;
                [w * (w * x).cos() * (w * y).sin(), w * (w * x).sin() * (w * y).cos()]
            }
        }
    }

    /// `Δu`, componentwise.
    pub fn velocity_laplacian(&self, p: Point) -> [f64; 2] {
        let [x, y] = p;
        match self.kind {
            Kind::Poly(k) => {
                let ki = k as i64;
                let s = if k >= 2 { 1.0 } else { 0.0 };
                let kf = k as f64;
                [
                    kf * (kf - 1.0) * pw(y, ki - 2) + s * 2.0 * (kf - 1.0) * (kf - 2.0) * pw(x, ki - 3) * y,
                    kf * (kf - 1.0) * pw(x, ki - 2)
                        - s * (kf - 1.0) * (kf - 2.0) * (kf - 3.0) * pw(x, ki - 4) * y * y
                        - s * 2.0 * (kf - 1.0) * pw(x, ki - 2),
                ]
            }
            Kind::Trig => {
                let (s, ds, d2s, d3s) = trig_factors(x);
                let (t, dt, d2t, d3t) = trig_factors(y);
                [d2s * dt + s * d3t, -d3s * t - ds * d2t]
            }
        }
    }

    /// `f = -ν Δu + ∇p`.
    pub fn load(&self, p: Point) -> [f64; 2] {
        let l = self.velocity_laplacian(p);
        let g = self.pressure_gradient(p);
        [-self.nu * l[0] + g[0], -self.nu * l[1] + g[1]]
    }

    /// Dirichlet data `g = u`.
    pub fn boundary(&self, p: Point) -> [f64; 2] {
        self.velocity(p)
    }

    pub fn divergence(&self, p: Point) -> f64 {
        let g = self.velocity_gradient(p);
        g[0][0] + g[1][1]
    }
}

/// `S(t) = sin²(πt)` and its first three derivatives.
fn trig_factors(t: f64) -> (f64, f64, f64, f64) {
    let s = (PI * t).sin();
    let (s2, c2) = ((2.0 * PI * t).sin(), (2.0 * PI * t).cos());
    (s * s, PI * s2, 2.0 * PI * PI * c2, -4.0 * PI * PI * PI * s2)
}

/// `poly-1` … `poly-5` and `trig`, all with `ν = 1`.
pub fn builtin_cases() -> Vec<ManufacturedCase> {
    let mut v: Vec<_> = (1..=MAX_DEGREE).map(|k| ManufacturedCase::poly(k).expect("degree in range")).collect();
    v.push(ManufacturedCase::trig());
    v
}

/// Looks a built-in case up by name.
pub fn case_by_name(name: &str) -> Result<ManufacturedCase, VerifyError> {
    builtin_cases().into_iter().find(|c| c.name == name).ok_or_else(|| VerifyError::UnknownCase(name.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_quad_grid, polygon_quadrature};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
    }

    fn domain_integral(f: impl Fn(Point) -> f64) -> f64 {
        let m = gen_quad_grid(4, 4, Domain::UNIT_SQUARE).unwrap();
        (0..m.n_cells()).map(|c| polygon_quadrature(&m, c, 20).unwrap().integrate(&f)).sum()
    }

    #[test]
    fn poly1_is_the_shear_flow() {
        let c = case_by_name("poly-1").unwrap();
        assert_eq!(c.velocity([0.3, 0.7]), [0.7, 0.3]);
        assert_eq!(c.load([0.3, 0.7]), [0.0, 0.0]);
    }

    #[test]
    fn all_cases_are_divergence_free_with_zero_mean_pressure() {
        for c in builtin_cases() {
            for p in random_points(100) {
                assert!(c.divergence(p).abs() < 1e-12, "{}", c.name());
            }
            assert!(domain_integral(|p| c.pressure(p)).abs() < 1e-10, "{}", c.name());
        }
    }

    fn fd_gradient(f: impl Fn(Point) -> f64, p: Point, h: f64) -> [f64; 2] {
        [
            (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h),
            (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h),
        ]
    }

    fn fd_laplacian(f: impl Fn(Point) -> f64, p: Point, h: f64) -> f64 {
        let c = f(p);
        (f([p[0] + h, p[1]]) + f([p[0] - h, p[1]]) + f([p[0], p[1] + h]) + f([p[0], p[1] - h]) - 4.0 * c) / (h * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for c in builtin_cases().into_iter().map(|c| c.with_nu(0.7)) {
            for p in random_points(10) {
                let g = c.velocity_gradient(p);
                for comp in 0..2 {
                    let fd = fd_gradient(|q| c.velocity(q)[comp], p, 1e-6);
                    assert!((fd[0] - g[comp][0]).abs() < 1e-6 && (fd[1] - g[comp][1]).abs() < 1e-6);
                }
                let pg = c.pressure_gradient(p);
                let fd = fd_gradient(|q| c.pressure(q), p, 1e-6);
                assert!((fd[0] - pg[0]).abs() < 1e-6 && (fd[1] - pg[1]).abs() < 1e-6, "{}", c.name());
            }
        }
    }

    #[test]
    fn trig_load_matches_finite_differences() {
        let c = ManufacturedCase::trig();
        let p = [0.25, 0.25];
        let f = c.load(p);
        // fourth-order stencils keep the truncation error well below 1e-6
        let h = 1e-3;
        let lap4 = |g: &dyn Fn(Point) -> f64| {
            let d2 = |e: [f64; 2]| {
                let at = |s: f64| g([p[0] + s * e[0], p[1] + s * e[1]]);
                (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
            };
            d2([1.0, 0.0]) + d2([0.0, 1.0])
        };
        let grad4 = |g: &dyn Fn(Point) -> f64, e: [f64; 2]| {
            let at = |s: f64| g([p[0] + s * e[0], p[1] + s * e[1]]);
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        };
        let pr = |q: Point| c.pressure(q);
        for comp in 0..2 {
            let u = |q: Point| c.velocity(q)[comp];
            let e = if comp == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
            let fd = -lap4(&u) + grad4(&pr, e);
            assert!((fd - f[comp]).abs() < 1e-6, "component {comp}: {fd} vs {}", f[comp]);
        }
        // the second-order stencil agrees to its own truncation level
        let coarse = -fd_laplacian(|q| c.velocity(q)[0], p, 1e-4) + fd_gradient(pr, p, 1e-4)[0];
        assert!((coarse - f[0]).abs() < 1e-3);
    }

    #[test]
    fn poly_loads_have_degree_k_minus_2() {
        // the load of poly-k is a polynomial of degree k-2: its (k-1)-th differences vanish
        for k in 1..=5usize {
            let c = ManufacturedCase::poly(k).unwrap();
            let n = k.saturating_sub(1).max(1);
            for comp in 0..2 {
                let mut vals: Vec<f64> = (0..=n).map(|i| c.load([0.1 + 0.2 * i as f64, 0.3])[comp]).collect();
                for _ in 0..n {
                    vals = vals.windows(2).map(|w| w[1] - w[0]).collect();
                }
                assert!(vals.iter().all(|v| v.abs() < 1e-9), "k={k}");
            }
        }
    }

    #[test]
    fn unknown_case() {
        assert!(matches!(case_by_name("nope"), Err(VerifyError::UnknownCase(_))));
        assert!(ManufacturedCase::poly(6).is_err());
    }
}
