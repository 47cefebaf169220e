//! Gauss rules on the unit interval and on triangles.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Largest number of points accepted by [`gauss_legendre`].
pub const MAX_POINTS: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_POINTS {
        return Err(Error::QuadratureOverflow(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A rule on the unit interval `[0, 1]`: (parameter, weight) pairs summing to 1.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<(f64, f64)>,
}

impl LineRule {
    pub fn gauss(n: usize) -> Result<Self> {
        let (x, w) = gauss_legendre(n)?;
        Ok(Self {
            points: x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect(),
        })
    }
}

/// A rule on the reference triangle `{(s, t): s, t >= 0, s + t <= 1}` in barycentric
/// form: `([l0, l1, l2], weight)` with weights summing to 1 (area-normalized).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<([f64; 3], f64)>,
}

impl TriangleRule {
    /// Symmetric 3-point rule, exact for quadratics.
    pub fn degree2() -> Self {
        let a = 2.0 / 3.0;
        let b = 1.0 / 6.0;
        Self {
            points: vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)],
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `n * n` points, exact for degree `2n - 2`.
    pub fn collapsed(n: usize) -> Result<Self> {
        let line = LineRule::gauss(n)?;
        let mut points = Vec::with_capacity(n * n);
        for &(s, ws) in &line.points {
            for &(t, wt) in &line.points {
                // (s, t) in the unit square maps to (s, (1 - s) t) with Jacobian (1 - s);
                // reference area 1/2 is normalized away, hence the factor 2.
                let x = s;
                let y = (1.0 - s) * t;
                let w = 2.0 * ws * wt * (1.0 - s);
                points.push(([1.0 - x - y, x, y], w));
            }
        }
        Ok(Self { points })
    }
}
