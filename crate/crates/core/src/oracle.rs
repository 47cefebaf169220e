//! Closed-form flat-interface solution and error norms against P1 fields.

use crate::assembly::Solution;
use crate::mesh::{Mesh, Region};
use crate::params::{vertical_wavenumber, PhysicalParams};
use crate::quadrature::TriangleRule;
use crate::{Error, Result, C64, I};

const ZERO: C64 = C64::new(0.0, 0.0);

/// A field pair `(p, u)` that can be evaluated anywhere in the cell.
pub trait ReferenceField {
    fn p(&self, x: [f64; 2]) -> C64;
    fn grad_p(&self, x: [f64; 2]) -> [C64; 2];
    fn u(&self, x: [f64; 2]) -> [C64; 2];
    /// `g[i][j] = d u_i / d x_j`.
    fn grad_u(&self, x: [f64; 2]) -> [[C64; 2]; 2];
}

/// The zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl ReferenceField for ZeroField {
    fn p(&self, _: [f64; 2]) -> C64 {
        ZERO
    }
    fn grad_p(&self, _: [f64; 2]) -> [C64; 2] {
        [ZERO; 2]
    }
    fn u(&self, _: [f64; 2]) -> [C64; 2] {
        [ZERO; 2]
    }
    fn grad_u(&self, _: [f64; 2]) -> [[C64; 2]; 2] {
        [[ZERO; 2]; 2]
    }
}

/// Exact solution for a flat interface `x2 = 0`:
///
/// `p = a1 e^{i(alpha x1 + beta x2)}`,
/// `u = a2 (alpha, -beta1) e^{i(alpha x1 - beta1 x2)} + a3 (beta2, alpha) e^{i(alpha x1 - beta2 x2)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactFlatSolution {
    pub a: [C64; 3],
    pub alpha: f64,
    pub beta: C64,
    pub beta1: C64,
    pub beta2: C64,
    pub params: PhysicalParams,
}

/// Coefficient matrix and right-hand side of the flat-interface system.
pub fn flat_system(params: &PhysicalParams) -> ([[C64; 3]; 3], [C64; 3]) {
    let alpha = params.alpha();
    let beta = vertical_wavenumber(params.kappa, alpha);
    let b1 = vertical_wavenumber(params.kappa1(), alpha);
    let b2 = vertical_wavenumber(params.kappa2(), alpha);
    let rw = params.rho_f * params.omega * params.omega;
    let (mu, lambda) = (params.mu, params.lambda);
    let (kp, ks) = (params.kappa1(), params.kappa2());
    let one = C64::new(1.0, 0.0);
    let m = [
        [I * beta, rw * b1, C64::new(-rw * alpha, 0.0)],
        [ZERO, 2.0 * I * mu * alpha * b1, 2.0 * I * mu * b2 * b2 - I * mu * ks * ks],
        [one, 2.0 * I * mu * b1 * b1 + I * lambda * kp * kp, -2.0 * I * mu * alpha * b2],
    ];
    (m, [I * beta, ZERO, -one])
}

fn solve3(mut m: [[C64; 3]; 3], mut r: [C64; 3]) -> Result<[C64; 3]> {
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm())).expect("nonempty");
        if m[p][k].norm() <= 1e-14 * scale {
            return Err(Error::SingularSystem);
        }
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
            let t = r[k];
            r[i] -= f * t;
        }
    }
    let mut x = [ZERO; 3];
    for k in (0..3).rev() {
        let s: C64 = (k + 1..3).map(|j| m[k][j] * x[j]).sum();
        x[k] = (r[k] - s) / m[k][k];
    }
    Ok(x)
}

pub fn exact_flat(params: &PhysicalParams) -> Result<ExactFlatSolution> {
    params.validate()?;
    let (m, r) = flat_system(params);
    let a = solve3(m, r)?;
    let alpha = params.alpha();
    Ok(ExactFlatSolution {
        a,
        alpha,
        beta: vertical_wavenumber(params.kappa, alpha),
        beta1: vertical_wavenumber(params.kappa1(), alpha),
        beta2: vertical_wavenumber(params.kappa2(), alpha),
        params: *params,
    })
}

impl ExactFlatSolution {
    fn waves(&self, x: [f64; 2]) -> (C64, C64) {
        let e1 = (I * (self.alpha * x[0] - self.beta1 * x[1])).exp();
        let e2 = (I * (self.alpha * x[0] - self.beta2 * x[1])).exp();
        (self.a[1] * e1, self.a[2] * e2)
    }

    /// Traction `sigma(u) nu`.
    pub fn traction(&self, x: [f64; 2], nu: [f64; 2]) -> [C64; 2] {
        let g = self.grad_u(x);
        let (l, m) = (self.params.lambda, self.params.mu);
        let div = g[0][0] + g[1][1];
        let s = [[l * div + 2.0 * m * g[0][0], m * (g[0][1] + g[1][0])], [m * (g[0][1] + g[1][0]), l * div + 2.0 * m * g[1][1]]];
        [s[0][0] * nu[0] + s[0][1] * nu[1], s[1][0] * nu[0] + s[1][1] * nu[1]]
    }
}

impl ReferenceField for ExactFlatSolution {
    fn p(&self, x: [f64; 2]) -> C64 {
        self.a[0] * (I * (self.alpha * x[0] + self.beta * x[1])).exp()
    }

    fn grad_p(&self, x: [f64; 2]) -> [C64; 2] {
        let v = self.p(x);
        [I * self.alpha * v, I * self.beta * v]
    }

    fn u(&self, x: [f64; 2]) -> [C64; 2] {
        let (w1, w2) = self.waves(x);
        [self.alpha * w1 + self.beta2 * w2, -self.beta1 * w1 + self.alpha * w2]
    }

    fn grad_u(&self, x: [f64; 2]) -> [[C64; 2]; 2] {
        let (w1, w2) = self.waves(x);
        let d1 = [I * self.alpha, -I * self.beta1];
        let d2 = [I * self.alpha, -I * self.beta2];
        let c1 = [C64::new(self.alpha, 0.0), -self.beta1];
        let c2 = [self.beta2, C64::new(self.alpha, 0.0)];
        let mut g = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = c1[i] * d1[j] * w1 + c2[i] * d2[j] * w2;
            }
        }
        g
    }
}

/// Nodal interpolant of a reference field.
pub fn interpolate(mesh: &Mesh, field: &dyn ReferenceField, n_trunc: usize) -> Solution {
    let regions = mesh.vertex_regions();
    let mut s = Solution::zero(mesh.num_vertices(), n_trunc);
    for (v, x) in mesh.vertices().iter().enumerate() {
        if regions[v].0 {
            s.p[v] = field.p(*x);
        }
        if regions[v].1 {
            s.u[v] = field.u(*x);
        }
    }
    s
}

/// `||U - U_h||` in the coupled energy norm, integrated per triangle with a collapsed
/// 8x8 Gauss rule.
pub fn coupled_h1_error(solution: &Solution, reference: &dyn ReferenceField, mesh: &Mesh, params: &PhysicalParams) -> Result<f64> {
    solution.check(mesh)?;
    let rule = TriangleRule::collapsed(8)?;
    let (lambda, mu) = (params.lambda, params.mu);
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.triangle_points(t);
        let g = mesh.barycentric_gradients(t);
        let area = mesh.area(t);
        let vs = tri.vertices;
        let mut acc = 0.0;
        match tri.region {
            Region::Fluid => {
                let ph = vs.map(|v| solution.p[v]);
                let gh = [0, 1].map(|j| (0..3).map(|i| ph[i] * g[i][j]).sum::<C64>());
                for (l, w) in &rule.points {
                    let x = [0, 1].map(|j| l[0] * pts[0][j] + l[1] * pts[1][j] + l[2] * pts[2][j]);
                    let e = reference.p(x) - (l[0] * ph[0] + l[1] * ph[1] + l[2] * ph[2]);
                    let ge = reference.grad_p(x);
                    acc += w * ((ge[0] - gh[0]).norm_sqr() + (ge[1] - gh[1]).norm_sqr() + e.norm_sqr());
                }
            }
            Region::Solid => {
                let uh = vs.map(|v| solution.u[v]);
                let mut gh = [[ZERO; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        gh[i][j] = (0..3).map(|k| uh[k][i] * g[k][j]).sum();
                    }
                }
                for (l, w) in &rule.points {
                    let x = [0, 1].map(|j| l[0] * pts[0][j] + l[1] * pts[1][j] + l[2] * pts[2][j]);
                    let ue = reference.u(x);
                    let ge = reference.grad_u(x);
                    let mut d = [[ZERO; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            d[i][j] = ge[i][j] - gh[i][j];
                        }
                    }
                    let eu = [0, 1].map(|i| ue[i] - (l[0] * uh[0][i] + l[1] * uh[1][i] + l[2] * uh[2][i]));
                    let div = d[0][0] + d[1][1];
                    // (mu/2) |grad + grad^T|^2 = 2 mu |eps|^2
                    let sym = (2.0 * d[0][0]).norm_sqr() + (2.0 * d[1][1]).norm_sqr() + 2.0 * (d[0][1] + d[1][0]).norm_sqr();
                    acc += w * (lambda * div.norm_sqr() + 0.5 * mu * sym + eu[0].norm_sqr() + eu[1].norm_sqr());
                }
            }
        }
        total += acc * area;
    }
    Ok(total.max(0.0).sqrt())
}
