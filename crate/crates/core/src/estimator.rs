//! Residual-type a posteriori indicators.
//!
//! `eta_K = h_K ||R u_h||_K + (1/2 sum_{e in dK} h_e ||J_e||_e^2)^{1/2}` where the element
//! residual of a P1 field reduces to the zeroth-order term and `J_e` is the edge jump, with
//! factor 2 on boundary and interface edges.

use crate::assembly::{AcousticSeries, Boundary, BoundaryTrace, ElasticSeries, IncidentField, Solution};
use crate::mesh::{EdgeClass, Mesh, Region};
use crate::params::{theta_bound, ModeTable, PhysicalParams};
use crate::quadrature::LineRule;
use crate::{Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorIndicators {
    pub eta_per_triangle: Vec<f64>,
    /// `sqrt(sum eta_K^2)`.
    pub eps_h: f64,
    /// `Theta(N) * ||p^i|| + ||d_n p^i||` on the interface.
    pub eps_n: f64,
    pub dof: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Gauss points per edge.
    pub edge_points: usize,
    pub incident: IncidentField,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { edge_points: 8, incident: IncidentField::PlaneWave }
    }
}

/// Squared L2 norms of the jumps on one edge, `(fluid, solid)`.
///
/// Interior and periodic edges carry one of the two; interface edges carry both.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeJump {
    pub fluid: f64,
    pub solid: f64,
}

/// `h_K ||R u_h||_{L2(K)}`: `h_K kappa^2 ||p_h||` on fluid, `h_K rho omega^2 ||u_h||` on solid.
pub fn element_residual(mesh: &Mesh, t: usize, solution: &Solution, params: &PhysicalParams) -> f64 {
    let tri = mesh.triangles()[t];
    let area = mesh.area(t);
    // exact P1 mass: |K|/12 (sum |v_i|^2 + |sum v_i|^2)
    let mass = |v: [C64; 3]| area / 12.0 * (v.iter().map(|z| z.norm_sqr()).sum::<f64>() + (v[0] + v[1] + v[2]).norm_sqr());
    let (coef, norm_sq) = match tri.region {
        Region::Fluid => (params.kappa * params.kappa, mass(tri.vertices.map(|v| solution.p[v]))),
        Region::Solid => {
            let u = tri.vertices.map(|v| solution.u[v]);
            (params.rho * params.omega * params.omega, mass(u.map(|w| w[0])) + mass(u.map(|w| w[1])))
        }
    };
    mesh.diameter(t) * coef * norm_sq.sqrt()
}

fn grad_p(mesh: &Mesh, t: usize, s: &Solution) -> [C64; 2] {
    let g = mesh.barycentric_gradients(t);
    let vs = mesh.triangles()[t].vertices;
    [0, 1].map(|j| (0..3).map(|k| s.p[vs[k]] * g[k][j]).sum())
}

/// Traction `sigma(u_h) nu` of the P1 displacement on triangle `t`.
fn traction(mesh: &Mesh, t: usize, s: &Solution, params: &PhysicalParams, nu: [f64; 2]) -> [C64; 2] {
    let g = mesh.barycentric_gradients(t);
    let vs = mesh.triangles()[t].vertices;
    let mut d = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] = (0..3).map(|k| s.u[vs[k]][i] * g[k][j]).sum();
        }
    }
    let (l, m) = (params.lambda, params.mu);
    let div = d[0][0] + d[1][1];
    let shear = m * (d[0][1] + d[1][0]);
    let s11 = l * div + 2.0 * m * d[0][0];
    let s22 = l * div + 2.0 * m * d[1][1];
    [s11 * nu[0] + shear * nu[1], shear * nu[0] + s22 * nu[1]]
}

fn dot(a: [C64; 2], n: [f64; 2]) -> C64 {
    a[0] * n[0] + a[1] * n[1]
}

pub fn jump_residuals(mesh: &Mesh, solution: &Solution, modes: &ModeTable, params: &PhysicalParams) -> Result<Vec<EdgeJump>> {
    jump_residuals_with(mesh, solution, modes, params, &EstimatorOptions::default())
}

pub fn jump_residuals_with(
    mesh: &Mesh,
    solution: &Solution,
    modes: &ModeTable,
    params: &PhysicalParams,
    options: &EstimatorOptions,
) -> Result<Vec<EdgeJump>> {
    solution.check(mesh)?;
    let rule = LineRule::gauss(options.edge_points)?;
    let top = BoundaryTrace::new(mesh, Boundary::Top)?;
    let bottom = BoundaryTrace::new(mesh, Boundary::Bottom)?;
    let top_vals: Vec<C64> = top.vertices.iter().map(|&v| solution.p[v]).collect();
    let bottom_vals: Vec<[C64; 2]> = bottom.vertices.iter().map(|&v| solution.u[v]).collect();
    let acoustic = AcousticSeries::new(&top, &top_vals, modes);
    let elastic = ElasticSeries::new(&bottom, &bottom_vals, modes);
    let phase = params.bloch_phase();
    let rf_w2 = params.rho_f * params.omega * params.omega;

    // Integrates |f|^2 along edge e, f given at the edge parameter s in [0, 1] from the
    // first sorted vertex.
    let integrate = |e: usize, f: &dyn Fn(f64, [f64; 2]) -> [C64; 2]| -> f64 {
        let [a, b] = mesh.edges()[e].vertices.map(|v| mesh.vertices()[v]);
        let len = mesh.edge_length(e);
        rule.points
            .iter()
            .map(|&(s, w)| {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let v = f(s, x);
                w * len * (v[0].norm_sqr() + v[1].norm_sqr())
            })
            .sum()
    };

    let mut out = vec![EdgeJump::default(); mesh.edges().len()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let t0 = edge.triangles.0;
        let len = mesh.edge_length(e);
        let jump = &mut out[e];
        match edge.class {
            EdgeClass::InteriorFluid => {
                let t1 = edge.triangles.1.expect("interior edge");
                let j = -(dot(grad_p(mesh, t0, solution), mesh.outward_normal(t0, e))
                    + dot(grad_p(mesh, t1, solution), mesh.outward_normal(t1, e)));
                jump.fluid = j.norm_sqr() * len;
            }
            EdgeClass::InteriorSolid => {
                let t1 = edge.triangles.1.expect("interior edge");
                let a = traction(mesh, t0, solution, params, mesh.outward_normal(t0, e));
                let b = traction(mesh, t1, solution, params, mesh.outward_normal(t1, e));
                jump.solid = ((a[0] + b[0]).norm_sqr() + (a[1] + b[1]).norm_sqr()) * len;
            }
            EdgeClass::Top => {
                let dp = grad_p(mesh, t0, solution)[1];
                jump.fluid = integrate(e, &|_, x| [2.0 * (acoustic.eval(x[0]) - dp), ZERO]);
            }
            EdgeClass::Bottom => {
                let tu = traction(mesh, t0, solution, params, [0.0, -1.0]);
                jump.solid = integrate(e, &|_, x| {
                    let t = elastic.eval(x[0]);
                    [2.0 * (t[0] - tu[0]), 2.0 * (t[1] - tu[1])]
                });
            }
            EdgeClass::Interface => {
                let (tf, ts) = mesh.interface_sides(e).expect("interface edge");
                let n = mesh.outward_normal(ts, e);
                let [va, vb] = edge.vertices;
                let (pa, pb) = (solution.p[va], solution.p[vb]);
                let (ua, ub) = (solution.u[va], solution.u[vb]);
                let dph = dot(grad_p(mesh, tf, solution), n);
                let tu = traction(mesh, ts, solution, params, n);
                let inc = options.incident;
                jump.fluid = integrate(e, &|s, x| {
                    let un = (ua[0] * (1.0 - s) + ub[0] * s) * n[0] + (ua[1] * (1.0 - s) + ub[1] * s) * n[1];
                    let dn = dot(inc.gradient(params, x), n) + dph;
                    [2.0 * (dn - rf_w2 * un), ZERO]
                });
                jump.solid = integrate(e, &|s, x| {
                    let pt = inc.value(params, x) + pa * (1.0 - s) + pb * s;
                    [-2.0 * (pt * n[0] + tu[0]), -2.0 * (pt * n[1] + tu[1])]
                });
            }
            EdgeClass::PeriodicLeft | EdgeClass::PeriodicRight => {
                let partner = edge.partner.expect("periodic edge has a partner");
                let t1 = mesh.edges()[partner].triangles.0;
                // own triangle's flux plus the partner's, shifted by the Bloch phase
                let shift = if edge.class == EdgeClass::PeriodicLeft { phase.conj() } else { phase };
                let region = mesh.triangles()[t0].region;
                let (nu0, nu1) = (mesh.outward_normal(t0, e), mesh.outward_normal(t1, partner));
                match region {
                    Region::Fluid => {
                        let j = -(dot(grad_p(mesh, t0, solution), nu0) + shift * dot(grad_p(mesh, t1, solution), nu1));
                        jump.fluid = j.norm_sqr() * len;
                    }
                    Region::Solid => {
                        let a = traction(mesh, t0, solution, params, nu0);
                        let b = traction(mesh, t1, solution, params, nu1);
                        jump.solid = ((a[0] + shift * b[0]).norm_sqr() + (a[1] + shift * b[1]).norm_sqr()) * len;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Scalar master unknowns: one per fluid vertex plus two per solid vertex, right-boundary
/// vertices excluded.
pub fn dof_count(mesh: &Mesh) -> usize {
    let mut slave = vec![false; mesh.num_vertices()];
    for &(_, r) in mesh.periodic_pairs() {
        slave[r] = true;
    }
    mesh.vertex_regions()
        .iter()
        .zip(&slave)
        .filter(|(_, &s)| !s)
        .map(|(&(f, so), _)| f as usize + 2 * so as usize)
        .sum()
}

pub fn indicators(
    mesh: &Mesh,
    solution: &Solution,
    modes: &ModeTable,
    params: &PhysicalParams,
    incident_norm: f64,
) -> Result<ErrorIndicators> {
    indicators_with(mesh, solution, modes, params, incident_norm, &EstimatorOptions::default())
}

pub fn indicators_with(
    mesh: &Mesh,
    solution: &Solution,
    modes: &ModeTable,
    params: &PhysicalParams,
    incident_norm: f64,
    options: &EstimatorOptions,
) -> Result<ErrorIndicators> {
    let jumps = jump_residuals_with(mesh, solution, modes, params, options)?;
    let mut eta = Vec::with_capacity(mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let edge_sum: f64 = mesh
            .triangle_edges(t)
            .iter()
            .map(|&e| {
                let j = match tri.region {
                    Region::Fluid => jumps[e].fluid,
                    Region::Solid => jumps[e].solid,
                };
                mesh.edge_length(e) * j
            })
            .sum();
        eta.push(element_residual(mesh, t, solution, params) + (0.5 * edge_sum).sqrt());
    }
    let eps_h = eta.iter().map(|e| e * e).sum::<f64>().sqrt();
    let bound = theta_bound(params, mesh.geometry().gap(), modes.n_max())?;
    Ok(ErrorIndicators { eta_per_triangle: eta, eps_h, eps_n: bound.theta * incident_norm, dof: dof_count(mesh) })
}
