//! Legacy ASCII VTK output of a P1 solution.

use std::fmt::Write;

use dtn_afem::assembly::Solution;
use dtn_afem::mesh::Mesh;

/// Point region codes: 0 fluid, 1 solid, 2 on the interface.
fn region_codes(mesh: &Mesh) -> Vec<u8> {
    mesh.vertex_regions()
        .iter()
        .map(|&(f, s)| match (f, s) {
            (true, true) => 2,
            (false, true) => 1,
            _ => 0,
        })
        .collect()
}

pub fn write_vtk(mesh: &Mesh, solution: &Solution, title: &str) -> String {
    let n = mesh.num_vertices();
    let m = mesh.num_triangles();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    writeln!(s, "{}", title.lines().next().unwrap_or("")).unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {n} double").unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{:e} {:e} 0", v[0], v[1]).unwrap();
    }
    writeln!(s, "CELLS {m} {}", 4 * m).unwrap();
    for t in mesh.triangles() {
        let [a, b, c] = t.vertices;
        writeln!(s, "3 {a} {b} {c}").unwrap();
    }
    writeln!(s, "CELL_TYPES {m}").unwrap();
    for _ in 0..m {
        s.push_str("5\n");
    }
    writeln!(s, "POINT_DATA {n}").unwrap();
    let mut scalars = |name: &str, values: &mut dyn Iterator<Item = f64>| {
        writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for v in values {
            writeln!(s, "{v:e}").unwrap();
        }
    };
    scalars("Re_p", &mut solution.p.iter().map(|z| z.re));
    scalars("Im_p", &mut solution.p.iter().map(|z| z.im));
    scalars("Re_u1", &mut solution.u.iter().map(|w| w[0].re));
    scalars("Im_u1", &mut solution.u.iter().map(|w| w[0].im));
    scalars("Re_u2", &mut solution.u.iter().map(|w| w[1].re));
    scalars("Im_u2", &mut solution.u.iter().map(|w| w[1].im));
    writeln!(s, "SCALARS region int 1\nLOOKUP_TABLE default").unwrap();
    for r in region_codes(mesh) {
        writeln!(s, "{r}").unwrap();
    }
    s
}
