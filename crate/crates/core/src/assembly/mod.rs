//! Quasi-periodic P1 discretization of the coupled fluid-solid problem with truncated DtN
//! boundary conditions.
//!
//! Unknowns live on master vertices only: a vertex on `x1 = period` takes the value of its
//! left partner times `exp(i alpha period)`. Matrix row `r` belongs to the test function, column
//! `c` to the trial function, so a local entry `A(phi_c, phi_r)` enters as
//! `A * s_c * conj(s_r)` with `s` the phase of the vertex.

mod dtn;

use std::collections::HashMap;

pub use dtn::{
    apply_dtn_truncated, apply_elastic_dtn_truncated, boundary_fourier_row, AcousticSeries, Boundary, BoundaryTrace,
    ElasticSeries,
};

use crate::mesh::{EdgeClass, Mesh, Region};
use crate::params::{ModeTable, PhysicalParams};
use crate::quadrature::LineRule;
use crate::{Error, Result, C64, I};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Global unknown index and the phase multiplying it at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub index: usize,
    pub phase: C64,
}

/// Map from vertices to master unknowns.
///
/// Interface vertices carry both a pressure unknown and a displacement pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    fluid: Vec<Option<Slot>>,
    /// Slot of `u1`; `u2` is the next index.
    solid: Vec<Option<Slot>>,
    total: usize,
    periodic_masters: Vec<(usize, usize)>,
    phase: C64,
}

impl DofMap {
    pub fn total_unknowns(&self) -> usize {
        self.total
    }

    pub fn num_vertices(&self) -> usize {
        self.fluid.len()
    }

    pub fn fluid(&self, v: usize) -> Option<Slot> {
        self.fluid[v]
    }

    pub fn solid(&self, v: usize) -> Option<Slot> {
        self.solid[v]
    }

    /// `(right vertex, left master vertex)` pairs; the right value is `phase * left`.
    pub fn periodic_masters(&self) -> &[(usize, usize)] {
        &self.periodic_masters
    }

    /// `exp(i alpha period)`.
    pub fn phase(&self) -> C64 {
        self.phase
    }

    fn matches(&self, mesh: &Mesh) -> bool {
        if self.fluid.len() != mesh.num_vertices() {
            return false;
        }
        mesh.triangles().iter().all(|t| {
            t.vertices.iter().all(|&v| match t.region {
                Region::Fluid => self.fluid[v].is_some(),
                Region::Solid => self.solid[v].is_some(),
            })
        })
    }

    /// Nodal fields from a master vector; slaves are reconstructed from their masters.
    pub fn expand(&self, x: &[C64], n_trunc: usize) -> Solution {
        let value = |s: Option<Slot>, off: usize| s.map_or(ZERO, |s| x[s.index + off] * s.phase);
        Solution {
            p: self.fluid.iter().map(|&s| value(s, 0)).collect(),
            u: self.solid.iter().map(|&s| [value(s, 0), value(s, 1)]).collect(),
            n_trunc,
        }
    }

    /// Master vector holding the nodal values of `solution` (slave values are ignored).
    pub fn restrict(&self, solution: &Solution) -> Vec<C64> {
        let mut x = vec![ZERO; self.total];
        for v in 0..self.fluid.len() {
            if let Some(s) = self.fluid[v] {
                if s.phase == C64::new(1.0, 0.0) {
                    x[s.index] = solution.p[v];
                }
            }
            if let Some(s) = self.solid[v] {
                if s.phase == C64::new(1.0, 0.0) {
                    x[s.index] = solution.u[v][0];
                    x[s.index + 1] = solution.u[v][1];
                }
            }
        }
        x
    }
}

/// Numbers master unknowns in lexicographic `(x1, x2)` vertex order, pressure before
/// displacement at interface vertices.
pub fn build_dof_map(mesh: &Mesh, params: &PhysicalParams) -> DofMap {
    let nv = mesh.num_vertices();
    let regions = mesh.vertex_regions();
    let mut left_of = vec![None; nv];
    for &(l, r) in mesh.periodic_pairs() {
        left_of[r] = Some(l);
    }
    let mut order: Vec<usize> = (0..nv).collect();
    let pts = mesh.vertices();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));

    let one = C64::new(1.0, 0.0);
    let mut fluid = vec![None; nv];
    let mut solid = vec![None; nv];
    let mut next = 0;
    for &v in &order {
        if left_of[v].is_some() {
            continue;
        }
        if regions[v].0 {
            fluid[v] = Some(Slot { index: next, phase: one });
            next += 1;
        }
        if regions[v].1 {
            solid[v] = Some(Slot { index: next, phase: one });
            next += 2;
        }
    }
    let phase = params.bloch_phase();
    let mut periodic_masters = Vec::new();
    for &(l, r) in mesh.periodic_pairs() {
        fluid[r] = fluid[l].map(|s: Slot| Slot { index: s.index, phase });
        solid[r] = solid[l].map(|s: Slot| Slot { index: s.index, phase });
        periodic_masters.push((r, l));
    }
    DofMap { fluid, solid, total: next, periodic_masters, phase }
}

/// Nodal values of the discrete fields; entries outside a field's region are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub p: Vec<C64>,
    pub u: Vec<[C64; 2]>,
    /// DtN truncation order used.
    pub n_trunc: usize,
}

impl Solution {
    pub fn zero(num_vertices: usize, n_trunc: usize) -> Self {
        Self { p: vec![ZERO; num_vertices], u: vec![[ZERO; 2]; num_vertices], n_trunc }
    }

    pub fn num_vertices(&self) -> usize {
        self.p.len()
    }

    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.p.len() != mesh.num_vertices() || self.u.len() != mesh.num_vertices() {
            return Err(Error::InconsistentMesh);
        }
        Ok(())
    }
}

/// Incident wave driving the problem; `Zero` switches the load off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IncidentField {
    /// `exp(i (alpha x1 - beta x2))`.
    #[default]
    PlaneWave,
    Zero,
}

impl IncidentField {
    pub fn value(self, params: &PhysicalParams, x: [f64; 2]) -> C64 {
        match self {
            IncidentField::PlaneWave => C64::from_polar(1.0, params.alpha() * x[0] - params.beta() * x[1]),
            IncidentField::Zero => ZERO,
        }
    }

    pub fn gradient(self, params: &PhysicalParams, x: [f64; 2]) -> [C64; 2] {
        let v = self.value(params, x);
        [I * params.alpha() * v, -I * params.beta() * v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Gauss points per interface edge for the load.
    pub edge_points: usize,
    pub incident: IncidentField,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { edge_points: 8, incident: IncidentField::PlaneWave }
    }
}

/// Dense Hermitian-structured update `sum_ij w_ij conj(f_i[r]) f_j[c]` on a set of unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankBlock {
    /// Global unknowns touched, ascending.
    pub support: Vec<usize>,
    /// Functionals over `support`.
    pub functionals: Vec<Vec<C64>>,
    /// `(test functional, trial functional, weight)`.
    pub weights: Vec<(usize, usize, C64)>,
}

impl LowRankBlock {
    pub fn rank(&self) -> usize {
        self.functionals.len()
    }

    /// Dense `support x support` matrix, row-major.
    pub fn dense(&self) -> Vec<C64> {
        let s = self.support.len();
        let k = self.functionals.len();
        let mut out = vec![ZERO; s * s];
        let mut t = vec![ZERO; k];
        for r in 0..s {
            t.iter_mut().for_each(|v| *v = ZERO);
            for &(i, j, w) in &self.weights {
                t[j] += w * self.functionals[i][r].conj();
            }
            let row = &mut out[r * s..(r + 1) * s];
            for (j, f) in self.functionals.iter().enumerate() {
                if t[j] == ZERO {
                    continue;
                }
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot += t[j] * f[c];
                }
            }
        }
        out
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let proj: Vec<C64> =
            self.functionals.iter().map(|f| f.iter().zip(&self.support).map(|(a, &c)| a * x[c]).sum()).collect();
        let mut t = vec![ZERO; self.functionals.len()];
        for &(i, j, w) in &self.weights {
            t[i] += w * proj[j];
        }
        for (i, f) in self.functionals.iter().enumerate() {
            for (a, &r) in f.iter().zip(&self.support) {
                y[r] += t[i] * a.conj();
            }
        }
    }
}

/// Sparse part in CSR form plus DtN low-rank blocks and the load vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    blocks: Vec<LowRankBlock>,
    rhs: Vec<C64>,
}

impl LinearSystem {
    /// Builds a system from unsorted triplets; duplicates are summed in input order.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>, blocks: Vec<LowRankBlock>, rhs: Vec<C64>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, col_idx, values, blocks, rhs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rhs(&self) -> &[C64] {
        &self.rhs
    }

    pub fn blocks(&self) -> &[LowRankBlock] {
        &self.blocks
    }

    pub fn sparse_nonzeros(&self) -> usize {
        self.values.len()
    }

    /// Row `r` of the sparse part as `(column, value)` pairs.
    pub fn sparse_row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y: Vec<C64> = (0..self.dim).map(|r| self.sparse_row(r).map(|(c, v)| v * x[c]).sum()).collect();
        for b in &self.blocks {
            b.apply(x, &mut y);
        }
        y
    }

    /// All entries with the low-rank blocks expanded, sorted by (row, column).
    pub fn expanded_triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut t: Vec<(usize, usize, C64)> = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            t.extend(self.sparse_row(r).map(|(c, v)| (r, c, v)));
        }
        for b in &self.blocks {
            let s = b.support.len();
            let d = b.dense();
            for (i, &r) in b.support.iter().enumerate() {
                for (j, &c) in b.support.iter().enumerate() {
                    t.push((r, c, d[i * s + j]));
                }
            }
        }
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged
    }

    /// Single entry including block contributions; for tests on small systems.
    pub fn entry(&self, r: usize, c: usize) -> C64 {
        let mut v: C64 = self.sparse_row(r).filter(|&(cc, _)| cc == c).map(|(_, v)| v).sum();
        for b in &self.blocks {
            if let (Ok(i), Ok(j)) = (b.support.binary_search(&r), b.support.binary_search(&c)) {
                for &(fi, fj, w) in &b.weights {
                    v += w * b.functionals[fi][i].conj() * b.functionals[fj][j];
                }
            }
        }
        v
    }
}

struct Accumulator {
    triplets: Vec<(usize, usize, C64)>,
    rhs: Vec<C64>,
}

impl Accumulator {
    fn add(&mut self, test: Slot, test_off: usize, trial: Slot, trial_off: usize, value: f64) {
        if value != 0.0 {
            let v = value * trial.phase * test.phase.conj();
            self.triplets.push((test.index + test_off, trial.index + trial_off, v));
        }
    }

    fn load(&mut self, test: Slot, off: usize, value: C64) {
        self.rhs[test.index + off] += value * test.phase.conj();
    }
}

pub fn assemble(mesh: &Mesh, params: &PhysicalParams, modes: &ModeTable, dofs: &DofMap) -> Result<LinearSystem> {
    assemble_with(mesh, params, modes, dofs, &AssemblyOptions::default())
}

pub fn assemble_with(
    mesh: &Mesh,
    params: &PhysicalParams,
    modes: &ModeTable,
    dofs: &DofMap,
    options: &AssemblyOptions,
) -> Result<LinearSystem> {
    if !dofs.matches(mesh) {
        return Err(Error::InconsistentMesh);
    }
    let rule = LineRule::gauss(options.edge_points)?;
    let n = dofs.total_unknowns();
    let mut acc = Accumulator { triplets: Vec::with_capacity(mesh.num_triangles() * 30), rhs: vec![ZERO; n] };
    let k2 = params.kappa * params.kappa;
    let rw2 = params.rho * params.omega * params.omega;
    let (lambda, mu) = (params.lambda, params.mu);

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = mesh.barycentric_gradients(t);
        let area = mesh.area(t);
        let mass = |i: usize, j: usize| area / 12.0 * if i == j { 2.0 } else { 1.0 };
        let dot = |i: usize, j: usize| g[i][0] * g[j][0] + g[i][1] * g[j][1];
        match tri.region {
            Region::Fluid => {
                let slots = tri.vertices.map(|v| dofs.fluid[v].expect("checked"));
                for i in 0..3 {
                    for j in 0..3 {
                        acc.add(slots[i], 0, slots[j], 0, area * dot(i, j) - k2 * mass(i, j));
                    }
                }
            }
            Region::Solid => {
                let slots = tri.vertices.map(|v| dofs.solid[v].expect("checked"));
                for i in 0..3 {
                    for b in 0..2 {
                        for j in 0..3 {
                            for a in 0..2 {
                                let mut e = lambda * g[j][a] * g[i][b] + mu * g[j][b] * g[i][a];
                                if a == b {
                                    e += mu * dot(i, j);
                                }
                                let mut v = area * e;
                                if a == b {
                                    v -= rw2 * mass(i, j);
                                }
                                acc.add(slots[i], b, slots[j], a, v);
                            }
                        }
                    }
                }
            }
        }
    }

    let rf_w2 = params.rho_f * params.omega * params.omega;
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.class != EdgeClass::Interface {
            continue;
        }
        let (_, ts) = mesh.interface_sides(e).expect("interface edge");
        let nrm = mesh.outward_normal(ts, e);
        let len = mesh.edge_length(e);
        let vs = edge.vertices;
        let fs = vs.map(|v| dofs.fluid[v].expect("interface vertex has pressure"));
        let ss = vs.map(|v| dofs.solid[v].expect("interface vertex has displacement"));
        let m1 = |i: usize, j: usize| len / 6.0 * if i == j { 2.0 } else { 1.0 };
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    // pressure test, displacement trial
                    acc.add(fs[i], 0, ss[j], a, rf_w2 * nrm[a] * m1(i, j));
                    // displacement test, pressure trial
                    acc.add(ss[i], a, fs[j], 0, nrm[a] * m1(i, j));
                }
            }
        }
        if options.incident != IncidentField::Zero {
            let [pa, pb] = vs.map(|v| mesh.vertices()[v]);
            for &(s, w) in &rule.points {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let pi = options.incident.value(params, x);
                let gi = options.incident.gradient(params, x);
                let dn = gi[0] * nrm[0] + gi[1] * nrm[1];
                for (i, phi) in [1.0 - s, s].into_iter().enumerate() {
                    let f = w * len * phi;
                    acc.load(fs[i], 0, dn * f);
                    for a in 0..2 {
                        acc.load(ss[i], a, -pi * nrm[a] * f);
                    }
                }
            }
        }
    }

    let blocks = vec![acoustic_block(mesh, params, modes, dofs)?, elastic_block(mesh, params, modes, dofs)?];
    Ok(LinearSystem::from_triplets(n, acc.triplets, blocks, acc.rhs))
}

/// Support of a boundary trace in master unknowns, with per-vertex (local index, phase).
fn trace_support(trace: &BoundaryTrace, slot_of: impl Fn(usize) -> Slot) -> (Vec<usize>, Vec<(usize, C64)>) {
    let slots: Vec<Slot> = trace.vertices.iter().map(|&v| slot_of(v)).collect();
    let mut support: Vec<usize> = slots.iter().map(|s| s.index).collect();
    support.sort_unstable();
    support.dedup();
    let local: HashMap<usize, usize> = support.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let map = slots.iter().map(|s| (local[&s.index], s.phase)).collect();
    (support, map)
}

fn acoustic_block(mesh: &Mesh, params: &PhysicalParams, modes: &ModeTable, dofs: &DofMap) -> Result<LowRankBlock> {
    let trace = BoundaryTrace::new(mesh, Boundary::Top)?;
    let (support, map) = trace_support(&trace, |v| dofs.fluid[v].expect("top vertex is fluid"));
    let mut functionals = Vec::with_capacity(modes.len());
    let mut weights = Vec::with_capacity(modes.len());
    for (k, m) in modes.iter().enumerate() {
        let row = trace.fourier_row(m.alpha);
        let mut f = vec![ZERO; support.len()];
        for (c, &(i, ph)) in row.iter().zip(&map) {
            f[i] += c * ph;
        }
        functionals.push(f);
        weights.push((k, k, -params.period * I * m.beta));
    }
    Ok(LowRankBlock { support, functionals, weights })
}

fn elastic_block(mesh: &Mesh, params: &PhysicalParams, modes: &ModeTable, dofs: &DofMap) -> Result<LowRankBlock> {
    let trace = BoundaryTrace::new(mesh, Boundary::Bottom)?;
    let (nodes, map) = trace_support(&trace, |v| dofs.solid[v].expect("bottom vertex is solid"));
    // Each node contributes u1 and u2 unknowns: local 2i and 2i+1.
    let support: Vec<usize> = nodes.iter().flat_map(|&g| [g, g + 1]).collect();
    let mut functionals = Vec::with_capacity(2 * modes.len());
    let mut weights = Vec::with_capacity(4 * modes.len());
    for (k, m) in modes.iter().enumerate() {
        let row = trace.fourier_row(m.alpha);
        for a in 0..2 {
            let mut f = vec![ZERO; support.len()];
            for (c, &(i, ph)) in row.iter().zip(&map) {
                f[2 * i + a] += c * ph;
            }
            functionals.push(f);
        }
        for b in 0..2 {
            for a in 0..2 {
                weights.push((2 * k + b, 2 * k + a, -params.period * m.m[b][a]));
            }
        }
    }
    Ok(LowRankBlock { support, functionals, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_initial_mesh, GeometrySpec, Profile, Triangle};
    use crate::params::derive_modes;
    use std::f64::consts::FRAC_PI_6;

    fn params(theta: f64) -> PhysicalParams {
        PhysicalParams { omega: 1.0, kappa: 1.0, theta, rho_f: 1.0, lambda: 1.0, mu: 1.0, rho: 1.0, period: 4.0 }
    }

    fn flat_mesh(h: f64) -> Mesh {
        let g = GeometrySpec { period: 4.0, b: 1.0, b_prime: 0.0, profile: Profile::Flat(0.0) };
        build_initial_mesh(&g, h).unwrap()
    }

    #[test]
    fn reference_triangle_stiffness() {
        let g = GeometrySpec { period: 1.0, b: 0.5, b_prime: 0.0, profile: Profile::Flat(0.0) };
        let v = vec![[0.0, -0.5], [1.0, -0.5], [1.0, 0.5], [0.0, 0.5]];
        let t = vec![
            Triangle { vertices: [0, 1, 3], region: Region::Fluid, generation: 0 },
            Triangle { vertices: [2, 3, 1], region: Region::Fluid, generation: 0 },
        ];
        let m = Mesh::from_parts(g, v, t).unwrap();
        let gr = m.barycentric_gradients(0);
        let area = m.area(0);
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                let k = area * (gr[i][0] * gr[j][0] + gr[i][1] * gr[j][1]);
                assert!((k - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dof_counts_and_phases() {
        let m = flat_mesh(1.0);
        let p = params(FRAC_PI_6);
        let d = build_dof_map(&m, &p);
        let regions = m.vertex_regions();
        let right: Vec<usize> = m.periodic_pairs().iter().map(|&(_, r)| r).collect();
        let (mut f, mut s) = (0, 0);
        for (v, &(fl, so)) in regions.iter().enumerate() {
            if right.contains(&v) {
                continue;
            }
            f += fl as usize;
            s += so as usize;
        }
        assert_eq!(d.total_unknowns(), f + 2 * s);
        for &(r, l) in d.periodic_masters() {
            let (sr, sl) = (d.fluid(r).or(d.solid(r)).unwrap(), d.fluid(l).or(d.solid(l)).unwrap());
            assert_eq!(sr.index, sl.index);
            assert!((sr.phase - p.bloch_phase()).norm() < 1e-15);
        }
        // interface vertex carries three scalars
        let iv = m.boundary_vertices(EdgeClass::Interface)[1];
        assert!(d.fluid(iv).is_some() && d.solid(iv).is_some());
        let d0 = build_dof_map(&m, &params(0.0));
        assert_eq!(d0.phase(), C64::new(1.0, 0.0));
    }

    #[test]
    fn zero_incident_gives_zero_rhs() {
        let m = flat_mesh(0.8);
        let p = params(FRAC_PI_6);
        let modes = derive_modes(&p, 4).unwrap();
        let d = build_dof_map(&m, &p);
        let opts = AssemblyOptions { incident: IncidentField::Zero, ..Default::default() };
        let sys = assemble_with(&m, &p, &modes, &d, &opts).unwrap();
        assert!(sys.rhs().iter().all(|v| *v == ZERO));
        assert!(sys.matvec(&vec![ZERO; sys.dim()]).iter().all(|v| *v == ZERO));
    }

    #[test]
    fn matvec_matches_expanded_triplets() {
        let m = flat_mesh(0.9);
        let p = params(FRAC_PI_6);
        let modes = derive_modes(&p, 3).unwrap();
        let d = build_dof_map(&m, &p);
        let sys = assemble(&m, &p, &modes, &d).unwrap();
        let x: Vec<C64> = (0..sys.dim()).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut y = vec![ZERO; sys.dim()];
        for (r, c, v) in sys.expanded_triplets() {
            y[r] += v * x[c];
        }
        let z = sys.matvec(&x);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn block_structure_at_normal_incidence() {
        let m = flat_mesh(1.0);
        let p = PhysicalParams { rho_f: 2.5, omega: 1.3, ..params(0.0) };
        let modes = derive_modes(&p, 2).unwrap();
        let d = build_dof_map(&m, &p);
        let sys = assemble(&m, &p, &modes, &d).unwrap();
        let n = sys.dim();
        let mut is_fluid = vec![false; n];
        for v in 0..m.num_vertices() {
            if let Some(s) = d.fluid(v) {
                is_fluid[s.index] = true;
            }
        }
        let rw = p.rho_f * p.omega * p.omega;
        for r in 0..n {
            for (c, v) in sys.sparse_row(r) {
                let t = sys.sparse_row(c).find(|&(cc, _)| cc == r).map(|(_, v)| v).unwrap_or(ZERO);
                match (is_fluid[r], is_fluid[c]) {
                    (true, true) | (false, false) => assert!((v - t).norm() < 1e-13, "volume block symmetry"),
                    (true, false) => assert!((v - rw * t).norm() < 1e-13, "a3 = rho_f w^2 a4^T"),
                    (false, true) => assert!((rw * v - t).norm() < 1e-13),
                }
            }
        }
    }

    #[test]
    fn acoustic_block_sign_per_mode() {
        // Rayleigh quotient of b1 on a mode-n trace: -Lambda i beta_n |p_n|^2, nonnegative real part
        // for evanescent modes.
        let m = flat_mesh(0.5);
        let p = params(FRAC_PI_6);
        let modes = derive_modes(&p, 3).unwrap();
        let d = build_dof_map(&m, &p);
        let sys = assemble(&m, &p, &modes, &d).unwrap();
        let b = &sys.blocks()[0];
        for (k, mode) in modes.iter().enumerate() {
            let f = &b.functionals[k];
            let x: Vec<C64> = f.iter().map(|a| a.conj()).collect();
            let mut q = ZERO;
            for &(i, j, w) in &b.weights {
                let fi: C64 = b.functionals[i].iter().zip(&x).map(|(a, v)| a * v).sum();
                let fj: C64 = b.functionals[j].iter().zip(&x).map(|(a, v)| a * v).sum();
                q += w * fi.conj() * fj;
            }
            if mode.beta.re == 0.0 {
                assert!(q.re > 0.0, "mode {}", mode.n);
            } else {
                assert!(q.re.abs() < 1e-12 && q.im < 0.0, "mode {}", mode.n);
            }
        }
    }

    #[test]
    fn inconsistent_dof_map_rejected() {
        let p = params(FRAC_PI_6);
        let modes = derive_modes(&p, 1).unwrap();
        let d = build_dof_map(&flat_mesh(1.0), &p);
        assert_eq!(assemble(&flat_mesh(0.5), &p, &modes, &d), Err(Error::InconsistentMesh));
    }
}
