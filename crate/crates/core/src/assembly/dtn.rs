//! Boundary Fourier coefficients and truncated DtN series on the artificial boundaries.

use crate::mesh::{EdgeClass, Mesh};
use crate::params::ModeTable;
use crate::{Error, Result, C64, I};

/// Which artificial boundary a trace lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `x2 = b`, fluid side.
    Top,
    /// `x2 = -b`, solid side.
    Bottom,
}

impl Boundary {
    fn class(self) -> EdgeClass {
        match self {
            Boundary::Top => EdgeClass::Top,
            Boundary::Bottom => EdgeClass::Bottom,
        }
    }
}

/// Vertices of one straight artificial boundary, ordered by `x1` from 0 to the period.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub boundary: Boundary,
    pub vertices: Vec<usize>,
    pub x: Vec<f64>,
    pub period: f64,
}

impl BoundaryTrace {
    pub fn new(mesh: &Mesh, boundary: Boundary) -> Result<Self> {
        let vertices = mesh.boundary_vertices(boundary.class());
        let period = mesh.geometry().period;
        if vertices.len() < 2 {
            return Err(Error::InvalidGeometry("artificial boundary has fewer than two vertices".into()));
        }
        let x: Vec<f64> = vertices.iter().map(|&v| mesh.vertices()[v][0]).collect();
        let y0 = mesh.vertices()[vertices[0]][1];
        let tol = 1e-12 * (period + mesh.geometry().b);
        if vertices.iter().any(|&v| (mesh.vertices()[v][1] - y0).abs() > tol)
            || x[0].abs() > tol
            || (x[x.len() - 1] - period).abs() > tol
        {
            return Err(Error::InvalidGeometry("artificial boundary is not a straight segment of one period".into()));
        }
        Ok(Self { boundary, vertices, x, period })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Row `c` with `c . values = (1/period) * int v_h exp(-i alpha_n x1) dx1` for P1 traces.
    pub fn fourier_row(&self, alpha_n: f64) -> Vec<C64> {
        let mut row = vec![C64::new(0.0, 0.0); self.x.len()];
        for k in 0..self.x.len() - 1 {
            let (xa, xb) = (self.x[k], self.x[k + 1]);
            let len = xb - xa;
            let (j0, j1) = exp_moments(C64::new(0.0, -alpha_n * len));
            let scale = C64::from_polar(len / self.period, -alpha_n * xa);
            row[k] += scale * (j0 - j1);
            row[k + 1] += scale * j1;
        }
        row
    }

    pub fn coefficient<T: Copy + Into<C64>>(&self, alpha_n: f64, values: &[T]) -> C64 {
        self.fourier_row(alpha_n).iter().zip(values).map(|(c, &v)| c * v.into()).sum()
    }
}

/// `(int_0^1 e^{zt} dt, int_0^1 t e^{zt} dt)`, with a series near `z = 0`.
fn exp_moments(z: C64) -> (C64, C64) {
    if z.norm() < 0.5 {
        let mut j0 = C64::new(0.0, 0.0);
        let mut j1 = C64::new(0.0, 0.0);
        let mut zk = C64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..24 {
            if k > 0 {
                fact *= k as f64;
                zk *= z;
            }
            j0 += zk / (fact * (k + 1) as f64);
            j1 += zk / (fact * (k + 2) as f64);
        }
        (j0, j1)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z))
    }
}

/// Exact row for `boundary` on `mesh`, indexed like [`BoundaryTrace::vertices`].
pub fn boundary_fourier_row(mesh: &Mesh, boundary: Boundary, alpha_n: f64) -> Result<Vec<C64>> {
    Ok(BoundaryTrace::new(mesh, boundary)?.fourier_row(alpha_n))
}

/// Truncated acoustic DtN series `sum i beta_n p_n exp(i alpha_n x1)`.
#[derive(Debug, Clone)]
pub struct AcousticSeries {
    terms: Vec<(f64, C64)>,
}

impl AcousticSeries {
    pub fn new(trace: &BoundaryTrace, values: &[C64], modes: &ModeTable) -> Self {
        let terms = modes.iter().map(|m| (m.alpha, I * m.beta * trace.coefficient(m.alpha, values))).collect();
        Self { terms }
    }

    pub fn eval(&self, x1: f64) -> C64 {
        self.terms.iter().map(|&(a, c)| c * C64::from_polar(1.0, a * x1)).sum()
    }
}

/// Truncated elastic DtN series `sum M_n u_n exp(i alpha_n x1)`.
#[derive(Debug, Clone)]
pub struct ElasticSeries {
    terms: Vec<(f64, [C64; 2])>,
}

impl ElasticSeries {
    pub fn new(trace: &BoundaryTrace, values: &[[C64; 2]], modes: &ModeTable) -> Self {
        let terms = modes
            .iter()
            .map(|m| {
                let row = trace.fourier_row(m.alpha);
                let mut un = [C64::new(0.0, 0.0); 2];
                for (c, v) in row.iter().zip(values) {
                    un[0] += c * v[0];
                    un[1] += c * v[1];
                }
                let t = [m.m[0][0] * un[0] + m.m[0][1] * un[1], m.m[1][0] * un[0] + m.m[1][1] * un[1]];
                (m.alpha, t)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x1: f64) -> [C64; 2] {
        let mut out = [C64::new(0.0, 0.0); 2];
        for &(a, t) in &self.terms {
            let e = C64::from_polar(1.0, a * x1);
            out[0] += t[0] * e;
            out[1] += t[1] * e;
        }
        out
    }
}

/// Nodal samples of the truncated acoustic DtN map applied to a P1 trace.
pub fn apply_dtn_truncated(trace: &BoundaryTrace, values: &[C64], modes: &ModeTable) -> Vec<C64> {
    let series = AcousticSeries::new(trace, values, modes);
    trace.x.iter().map(|&x| series.eval(x)).collect()
}

/// Nodal samples of the truncated elastic DtN map applied to a P1 trace.
pub fn apply_elastic_dtn_truncated(trace: &BoundaryTrace, values: &[[C64; 2]], modes: &ModeTable) -> Vec<[C64; 2]> {
    let series = ElasticSeries::new(trace, values, modes);
    trace.x.iter().map(|&x| series.eval(x)).collect()
}
