use std::collections::HashMap;

use super::{key, EdgeClass, Mesh, Triangle};
use crate::{Error, Result};

/// Newest-vertex bisection of the marked triangles plus the closure needed for conformity.
///
/// Periodic edges are refined together with their partners so the two sides stay matched.
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Result<Mesh> {
    let n_edges = mesh.edges().len();
    let mut split = vec![false; n_edges];
    for &t in marked {
        if t >= mesh.num_triangles() {
            return Err(Error::InvalidGeometry(format!("marked triangle {t} does not exist")));
        }
        split[mesh.triangle_edges(t)[0]] = true;
    }
    close_marking(mesh, &mut split);

    let geometry = mesh.geometry();
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    for (id, edge) in mesh.edges().iter().enumerate() {
        if !split[id] {
            continue;
        }
        let [a, b] = edge.vertices;
        let mut m = mesh.edge_midpoint(id);
        if edge.class == EdgeClass::Interface {
            m[1] = geometry.profile_at(m[0]);
        }
        midpoint.insert(key(a, b), vertices.len());
        vertices.push(m);
    }

    let mut triangles = Vec::with_capacity(mesh.num_triangles() * 2);
    let mut stack: Vec<Triangle> = Vec::new();
    for &t in mesh.triangles() {
        stack.push(t);
        while let Some(t) = stack.pop() {
            let [v0, v1, v2] = t.vertices;
            match midpoint.get(&key(v1, v2)) {
                Some(&m) => {
                    let g = t.generation + 1;
                    // Second child pushed first so the first child is emitted first.
                    stack.push(Triangle { vertices: [m, v2, v0], region: t.region, generation: g });
                    stack.push(Triangle { vertices: [m, v0, v1], region: t.region, generation: g });
                }
                None => triangles.push(t),
            }
        }
    }
    Mesh::from_parts(geometry.clone(), vertices, triangles)
}

/// Extends an edge marking until every triangle with a marked edge has its refinement edge
/// marked and periodic partners agree.
fn close_marking(mesh: &Mesh, split: &mut [bool]) {
    loop {
        let mut changed = false;
        for (id, e) in mesh.edges().iter().enumerate() {
            if split[id] {
                if let Some(p) = e.partner {
                    if !split[p] {
                        split[p] = true;
                        changed = true;
                    }
                }
            }
        }
        for t in 0..mesh.num_triangles() {
            let te = mesh.triangle_edges(t);
            if !split[te[0]] && (split[te[1]] || split[te[2]]) {
                split[te[0]] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Two rounds of bisecting every triangle: each element is split into four.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    let all: Vec<usize> = (0..mesh.num_triangles()).collect();
    let once = refine(mesh, &all)?;
    let all: Vec<usize> = (0..once.num_triangles()).collect();
    refine(&once, &all)
}
