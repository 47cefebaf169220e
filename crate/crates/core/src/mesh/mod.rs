//! Conforming triangulations of the periodic cell.
//!
//! Triangles store their vertices counter-clockwise with the newest vertex first;
//! the edge opposite it (local vertices 1 and 2) is the refinement edge.

mod build;
mod geometry;
mod io;
mod refine;

use std::collections::HashMap;

pub use build::build_initial_mesh;
pub use geometry::{GeometrySpec, Harmonic, Profile};
pub use refine::{refine, refine_uniform};

use crate::{Error, Result};

/// Smallest admissible triangle area relative to `period^2`.
pub const MIN_AREA_FACTOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Fluid,
    Solid,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Fluid => "fluid",
            Region::Solid => "solid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    InteriorFluid,
    InteriorSolid,
    Interface,
    /// On `x2 = b`.
    Top,
    /// On `x2 = -b`.
    Bottom,
    /// On `x1 = 0`.
    PeriodicLeft,
    /// On `x1 = period`.
    PeriodicRight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub region: Region,
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Sorted vertex pair.
    pub vertices: [usize; 2],
    pub class: EdgeClass,
    /// Incident triangles; the second is present for interior and interface edges.
    pub triangles: (usize, Option<usize>),
    /// Matching edge on the opposite periodic side.
    pub partner: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    geometry: GeometrySpec,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
    periodic_pairs: Vec<(usize, usize)>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds a classified mesh from raw vertex and triangle lists.
    pub fn from_parts(geometry: GeometrySpec, vertices: Vec<[f64; 2]>, triangles: Vec<Triangle>) -> Result<Self> {
        let guard = MIN_AREA_FACTOR * geometry.period * geometry.period;
        for (index, t) in triangles.iter().enumerate() {
            if t.vertices.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidGeometry(format!("triangle {index} references a missing vertex")));
            }
            let [a, b, c] = t.vertices.map(|v| vertices[v]);
            let area = signed_area(a, b, c);
            if !(area > guard) {
                return Err(Error::DegenerateTriangle { index, area });
            }
        }
        let mut mesh = Mesh {
            geometry,
            vertices,
            triangles,
            edges: Vec::new(),
            triangle_edges: Vec::new(),
            periodic_pairs: Vec::new(),
            edge_lookup: HashMap::new(),
        };
        mesh.classify()?;
        Ok(mesh)
    }

    fn coordinate_tolerance(&self) -> f64 {
        1e-12 * (self.geometry.period + self.geometry.b)
    }

    fn classify(&mut self) -> Result<()> {
        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut triangle_edges = Vec::with_capacity(self.triangles.len());
        for (ti, t) in self.triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for (local, slot) in te.iter_mut().enumerate() {
                let a = t.vertices[(local + 1) % 3];
                let b = t.vertices[(local + 2) % 3];
                let k = key(a, b);
                let id = match lookup.get(&k) {
                    Some(&id) => {
                        let e = &mut edges[id];
                        if e.triangles.1.is_some() {
                            return Err(Error::InvalidGeometry(format!(
                                "edge ({a}, {b}) has more than two incident triangles"
                            )));
                        }
                        e.triangles.1 = Some(ti);
                        id
                    }
                    None => {
                        let id = edges.len();
                        edges.push(Edge {
                            vertices: [k.0, k.1],
                            class: EdgeClass::InteriorFluid,
                            triangles: (ti, None),
                            partner: None,
                        });
                        lookup.insert(k, id);
                        id
                    }
                };
                *slot = id;
            }
            triangle_edges.push(te);
        }

        let tol = self.coordinate_tolerance();
        let period = self.geometry.period;
        let b = self.geometry.b;
        for e in edges.iter_mut() {
            let [p, q] = e.vertices.map(|v| self.vertices[v]);
            e.class = match e.triangles {
                (t0, Some(t1)) => {
                    let (r0, r1) = (self.triangles[t0].region, self.triangles[t1].region);
                    match (r0, r1) {
                        (Region::Fluid, Region::Fluid) => EdgeClass::InteriorFluid,
                        (Region::Solid, Region::Solid) => EdgeClass::InteriorSolid,
                        _ => EdgeClass::Interface,
                    }
                }
                (_, None) => {
                    if p[0].abs() <= tol && q[0].abs() <= tol {
                        EdgeClass::PeriodicLeft
                    } else if (p[0] - period).abs() <= tol && (q[0] - period).abs() <= tol {
                        EdgeClass::PeriodicRight
                    } else if (p[1] - b).abs() <= tol && (q[1] - b).abs() <= tol {
                        EdgeClass::Top
                    } else if (p[1] + b).abs() <= tol && (q[1] + b).abs() <= tol {
                        EdgeClass::Bottom
                    } else {
                        return Err(Error::UnclassifiableEdge(e.vertices[0], e.vertices[1]));
                    }
                }
            };
        }

        // Periodic vertex pairing: left and right traces must coincide in x2.
        let mut left: Vec<usize> = Vec::new();
        let mut right: Vec<usize> = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v[0].abs() <= tol {
                left.push(i);
            } else if (v[0] - period).abs() <= tol {
                right.push(i);
            }
        }
        let by_height = |a: &usize, c: &usize| self.vertices[*a][1].total_cmp(&self.vertices[*c][1]);
        left.sort_by(by_height);
        right.sort_by(by_height);
        if left.len() != right.len() {
            return Err(Error::PeriodicMismatch(format!(
                "{} vertices at x1 = 0 but {} at x1 = period",
                left.len(),
                right.len()
            )));
        }
        let mut pairs = Vec::with_capacity(left.len());
        let mut right_of = HashMap::new();
        for (&l, &r) in left.iter().zip(&right) {
            let dy = (self.vertices[l][1] - self.vertices[r][1]).abs();
            if dy > tol {
                return Err(Error::PeriodicMismatch(format!("heights differ by {dy} for vertices {l} and {r}")));
            }
            pairs.push((l, r));
            right_of.insert(l, r);
        }
        for id in 0..edges.len() {
            if edges[id].class == EdgeClass::PeriodicLeft {
                let [a, c] = edges[id].vertices;
                let (Some(&ra), Some(&rc)) = (right_of.get(&a), right_of.get(&c)) else {
                    return Err(Error::PeriodicMismatch(format!("left edge ({a}, {c}) has unpaired vertices")));
                };
                let Some(&pid) = lookup.get(&key(ra, rc)) else {
                    return Err(Error::PeriodicMismatch(format!("left edge ({a}, {c}) has no right partner")));
                };
                if edges[pid].class != EdgeClass::PeriodicRight {
                    return Err(Error::PeriodicMismatch(format!("partner of left edge ({a}, {c}) is not periodic")));
                }
                edges[id].partner = Some(pid);
                edges[pid].partner = Some(id);
            }
        }
        if let Some(e) = edges.iter().find(|e| e.class == EdgeClass::PeriodicRight && e.partner.is_none()) {
            return Err(Error::PeriodicMismatch(format!(
                "right edge ({}, {}) has no left partner",
                e.vertices[0], e.vertices[1]
            )));
        }

        self.edges = edges;
        self.edge_lookup = lookup;
        self.triangle_edges = triangle_edges;
        self.periodic_pairs = pairs;
        Ok(())
    }

    pub fn geometry(&self) -> &GeometrySpec {
        &self.geometry
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge ids of triangle `t`; local edge `i` is opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// `(left, right)` vertex pairs ordered by height.
    pub fn periodic_pairs(&self) -> &[(usize, usize)] {
        &self.periodic_pairs
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].vertices.map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Longest edge length.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        (0..3)
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % 3]);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .fold(0.0, f64::max)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices.map(|v| self.vertices[v]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].vertices.map(|v| self.vertices[v]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Gradients of the three barycentric (P1 hat) functions, constant on `t`.
    pub fn barycentric_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangle_points(t);
        let two_area = 2.0 * signed_area(a, b, c);
        [
            [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
            [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
            [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
        ]
    }

    /// Unit normal of edge `e` pointing out of triangle `t`.
    pub fn outward_normal(&self, t: usize, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].vertices.map(|v| self.vertices[v]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
        // Flip towards the side away from the opposite vertex.
        let opp = self.triangles[t]
            .vertices
            .iter()
            .copied()
            .find(|v| !self.edges[e].vertices.contains(v))
            .expect("edge belongs to triangle");
        let o = self.vertices[opp];
        if (o[0] - a[0]) * n[0] + (o[1] - a[1]) * n[1] > 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }

    /// For an interface edge: (fluid triangle, solid triangle).
    pub fn interface_sides(&self, e: usize) -> Option<(usize, usize)> {
        let edge = &self.edges[e];
        if edge.class != EdgeClass::Interface {
            return None;
        }
        let (t0, t1) = (edge.triangles.0, edge.triangles.1?);
        if self.triangles[t0].region == Region::Fluid {
            Some((t0, t1))
        } else {
            Some((t1, t0))
        }
    }

    /// Vertices on the edges of `class`, sorted by `x1`.
    pub fn boundary_vertices(&self, class: EdgeClass) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.class == class)
            .flat_map(|e| e.vertices)
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs.sort_by(|a, b| {
            let (pa, pb) = (self.vertices[*a], self.vertices[*b]);
            pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1]))
        });
        vs
    }

    /// Interface vertices from `x1 = 0` to `x1 = period`.
    pub fn interface_polyline(&self) -> Vec<[f64; 2]> {
        self.boundary_vertices(EdgeClass::Interface).into_iter().map(|v| self.vertices[v]).collect()
    }

    /// Region membership of each vertex: (touches fluid, touches solid).
    pub fn vertex_regions(&self) -> Vec<(bool, bool)> {
        let mut r = vec![(false, false); self.vertices.len()];
        for t in &self.triangles {
            for &v in &t.vertices {
                match t.region {
                    Region::Fluid => r[v].0 = true,
                    Region::Solid => r[v].1 = true,
                }
            }
        }
        r
    }

    /// Checks the structural invariants; used by tests and after import.
    pub fn check_invariants(&self) -> Result<()> {
        let guard = MIN_AREA_FACTOR * self.geometry.period * self.geometry.period;
        for t in 0..self.triangles.len() {
            let area = self.area(t);
            if !(area > guard) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
        }
        let total: f64 = (0..self.triangles.len()).map(|t| self.area(t)).sum();
        let cell = 2.0 * self.geometry.b * self.geometry.period;
        if ((total - cell) / cell).abs() > 1e-10 {
            return Err(Error::InvalidGeometry(format!("triangle areas sum to {total}, cell area {cell}")));
        }
        let tol = self.coordinate_tolerance();
        for e in &self.edges {
            if e.class == EdgeClass::Interface {
                for v in e.vertices {
                    let [x, y] = self.vertices[v];
                    if (y - self.geometry.profile_at(x)).abs() > tol {
                        return Err(Error::InvalidGeometry(format!("interface vertex {v} is off the profile")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Re-derives every edge class and the periodic pairing from vertices and triangles.
pub fn classify_edges(mesh: &Mesh) -> Result<Mesh> {
    Mesh::from_parts(mesh.geometry.clone(), mesh.vertices.clone(), mesh.triangles.clone())
}
