//! Plain-text mesh format.
//!
//! ```text
//! vertices N triangles M
//! x y            (N lines)
//! i j k region   (M lines, region is `fluid` or `solid`)
//! ```

use std::fmt::Write;

use super::{GeometrySpec, Mesh, Region, Triangle};
use crate::{Error, Result};

impl Mesh {
    /// Serializes vertices and triangles; floats use the shortest exact representation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vertices {} triangles {}", self.num_vertices(), self.num_triangles()).unwrap();
        for v in self.vertices() {
            writeln!(s, "{:e} {:e}", v[0], v[1]).unwrap();
        }
        for t in self.triangles() {
            let [a, b, c] = t.vertices;
            writeln!(s, "{a} {b} {c} {}", t.region.as_str()).unwrap();
        }
        s
    }

    /// Parses [`Mesh::to_text`] output; generations reset to zero.
    pub fn from_text(geometry: GeometrySpec, text: &str) -> Result<Mesh> {
        let err = |line: usize, message: &str| Error::MeshFormat { line, message: message.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (nv, nt) = match h.as_slice() {
            ["vertices", nv, "triangles", nt] => (
                nv.parse::<usize>().map_err(|_| err(ln, "bad vertex count"))?,
                nt.parse::<usize>().map_err(|_| err(ln, "bad triangle count"))?,
            ),
            _ => return Err(err(ln, "expected `vertices N triangles M`")),
        };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing vertex line"))?;
            let xs: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(ln, "bad coordinate"))?;
            if xs.len() != 2 || xs.iter().any(|x| !x.is_finite()) {
                return Err(err(ln, "expected two finite coordinates"));
            }
            vertices.push([xs[0], xs[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing triangle line"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err(ln, "expected `i j k region`"));
            }
            let mut idx = [0usize; 3];
            for (slot, s) in idx.iter_mut().zip(&f[..3]) {
                *slot = s.parse().map_err(|_| err(ln, "bad vertex index"))?;
                if *slot >= nv {
                    return Err(err(ln, "vertex index out of range"));
                }
            }
            let region = match f[3] {
                "fluid" => Region::Fluid,
                "solid" => Region::Solid,
                _ => return Err(err(ln, "region must be fluid or solid")),
            };
            triangles.push(Triangle { vertices: idx, region, generation: 0 });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "trailing content"));
        }
        Mesh::from_parts(geometry, vertices, triangles)
    }
}
