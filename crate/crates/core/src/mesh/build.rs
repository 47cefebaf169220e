use super::{GeometrySpec, Mesh, Region, Triangle};
use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 40;
const MAX_VERTICES: usize = 4_000_000;
/// Narrowest column, relative to the period, accepted before a wall counts as vertical.
const MIN_COLUMN_WIDTH: f64 = 1e-6;

/// Fails fast when a profile segment is so steep that its interface edges could only reach
/// `target_h` with columns thinner than `MIN_COLUMN_WIDTH * period`.
fn check_steepness(geometry: &GeometrySpec, target_h: f64) -> Result<()> {
    let mut bps = geometry.profile.breakpoints(geometry.period);
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    for w in bps.windows(2) {
        let (width, rise) = (w[1] - w[0], geometry.profile_at(w[1]) - geometry.profile_at(w[0]));
        let needed = (width.hypot(rise) / target_h).ceil().max(1.0);
        if width / needed < MIN_COLUMN_WIDTH * geometry.period {
            return Err(Error::ProfileTooSteep {
                target_h,
                reason: format!("segment [{}, {}] rises {rise} over width {width}", w[0], w[1]),
            });
        }
    }
    Ok(())
}

/// Column abscissae: profile breakpoints, each gap split into equal pieces of width `<= spacing`.
fn columns(geometry: &GeometrySpec, spacing: f64) -> Vec<f64> {
    // Keep the sagitta of interface edges well below the distance to the next row so
    // that snapping bisection midpoints onto the curve cannot fold neighbouring triangles.
    let curvature = geometry.profile.curvature(geometry.period);
    let slope = geometry.profile.lipschitz(geometry.period);
    let spacing = if curvature > 0.0 {
        spacing.min((spacing / (curvature * slope.hypot(1.0))).sqrt())
    } else {
        spacing
    };
    let mut bps = geometry.profile.breakpoints(geometry.period);
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut xs = vec![0.0];
    for w in bps.windows(2) {
        let k = ((w[1] - w[0]) / spacing).ceil().max(1.0) as usize;
        for j in 1..=k {
            xs.push(if j == k { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / k as f64 });
        }
    }
    let last = xs.len() - 1;
    xs[last] = geometry.period;
    xs
}

fn mapped_mesh(geometry: &GeometrySpec, spacing: f64) -> Result<(Vec<[f64; 2]>, Vec<Triangle>)> {
    let xs = columns(geometry, spacing);
    let b = geometry.b;
    let (fmin, fmax) = geometry.profile.range(geometry.period);
    let rows_fluid = ((b - fmin) / spacing).ceil().max(1.0) as usize;
    let rows_solid = ((fmax + b) / spacing).ceil().max(1.0) as usize;
    let per_column = rows_solid + rows_fluid + 1;
    if xs.len() * per_column > MAX_VERTICES {
        return Err(Error::ProfileTooSteep {
            target_h: spacing,
            reason: "required resolution exceeds the vertex cap".into(),
        });
    }
    let f0 = geometry.profile_at(0.0);
    let mut vertices = Vec::with_capacity(xs.len() * per_column);
    for (i, &x) in xs.iter().enumerate() {
        // Both periodic sides use f(0) so their traces match bit for bit.
        let f = if i == 0 || i == xs.len() - 1 { f0 } else { geometry.profile_at(x) };
        for j in 0..=rows_solid {
            let y = match j {
                0 => -b,
                j if j == rows_solid => f,
                j => -b + (f + b) * j as f64 / rows_solid as f64,
            };
            vertices.push([x, y]);
        }
        for j in 1..=rows_fluid {
            let y = if j == rows_fluid { b } else { f + (b - f) * j as f64 / rows_fluid as f64 };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, r: usize| i * per_column + r;
    let mut triangles = Vec::with_capacity(2 * (xs.len() - 1) * (per_column - 1));
    for i in 0..xs.len() - 1 {
        for r in 0..per_column - 1 {
            let region = if r < rows_solid { Region::Solid } else { Region::Fluid };
            let quad = [id(i, r), id(i + 1, r), id(i + 1, r + 1), id(i, r + 1)];
            // The shared diagonal is the refinement edge of both halves, which makes the
            // labelling compatible: bisecting everything twice yields exactly 4x elements.
            for vertices in [[quad[1], quad[2], quad[0]], [quad[3], quad[0], quad[2]]] {
                triangles.push(Triangle { vertices, region, generation: 0 });
            }
        }
    }
    Ok((vertices, triangles))
}

/// Structured mesh of the cell, graded along the profile, with every edge `<= target_h`.
pub fn build_initial_mesh(geometry: &GeometrySpec, target_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(Error::InvalidGeometry(format!("target_h must be positive, got {target_h}")));
    }
    geometry.validate()?;
    check_steepness(geometry, target_h)?;
    let mut spacing = target_h / std::f64::consts::SQRT_2;
    for _ in 0..MAX_ATTEMPTS {
        let (vertices, triangles) = mapped_mesh(geometry, spacing)?;
        let mesh = match Mesh::from_parts(geometry.clone(), vertices, triangles) {
            Ok(m) => m,
            Err(Error::DegenerateTriangle { .. }) => {
                spacing *= 0.85;
                continue;
            }
            Err(e) => return Err(e),
        };
        let longest = (0..mesh.edges().len()).map(|e| mesh.edge_length(e)).fold(0.0, f64::max);
        if longest <= target_h * (1.0 + 1e-12) {
            return Ok(mesh);
        }
        spacing *= 0.85;
    }
    Err(Error::ProfileTooSteep {
        target_h,
        reason: format!("profile slope {} prevents edges <= target_h", geometry.profile.lipschitz(geometry.period)),
    })
}
