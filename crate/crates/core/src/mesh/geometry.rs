use std::f64::consts::PI;

use crate::{Error, Result};

/// One harmonic `sin_amp sin(2 pi k x / L) + cos_amp cos(2 pi k x / L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub k: u32,
    pub sin_amp: f64,
    pub cos_amp: f64,
}

/// Fluid-solid interface `x2 = f(x1)` over one period.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Flat(f64),
    /// Trigonometric polynomial, periodic by construction.
    Harmonic { offset: f64, terms: Vec<Harmonic> },
    /// Piecewise-linear through `(x1, x2)` samples with first x1 = 0, last x1 = period.
    Piecewise(Vec<(f64, f64)>),
}

impl Profile {
    /// `0.1 + 0.15 sin(x1) + 0.35 cos(5 x1)` on a `2 pi` period.
    pub fn curved_example() -> Self {
        Profile::Harmonic {
            offset: 0.1,
            terms: vec![
                Harmonic { k: 1, sin_amp: 0.15, cos_amp: 0.0 },
                Harmonic { k: 5, sin_amp: 0.0, cos_amp: 0.35 },
            ],
        }
    }

    /// Triangle wave with `teeth` peaks of height `amplitude` above zero.
    pub fn sawtooth(period: f64, teeth: usize, amplitude: f64) -> Self {
        let teeth = teeth.max(1);
        let w = period / teeth as f64;
        let mut pts = Vec::with_capacity(2 * teeth + 1);
        for j in 0..teeth {
            pts.push((j as f64 * w, 0.0));
            pts.push((j as f64 * w + 0.5 * w, amplitude));
        }
        pts.push((period, 0.0));
        Profile::Piecewise(pts)
    }

    pub fn eval(&self, period: f64, x: f64) -> f64 {
        match self {
            Profile::Flat(c) => *c,
            Profile::Harmonic { offset, terms } => {
                let mut v = *offset;
                for h in terms {
                    let arg = 2.0 * PI * h.k as f64 * x / period;
                    v += h.sin_amp * arg.sin() + h.cos_amp * arg.cos();
                }
                v
            }
            Profile::Piecewise(pts) => {
                let x = x.clamp(pts[0].0, pts[pts.len() - 1].0);
                let j = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
                let (x0, y0) = pts[j - 1];
                let (x1, y1) = pts[j];
                if x1 == x0 {
                    return y1;
                }
                let t = (x - x0) / (x1 - x0);
                y0 + t * (y1 - y0)
            }
        }
    }

    /// Abscissae where the profile has kinks; these become mesh columns.
    pub fn breakpoints(&self, period: f64) -> Vec<f64> {
        match self {
            Profile::Piecewise(pts) => pts.iter().map(|p| p.0).collect(),
            _ => vec![0.0, period],
        }
    }

    pub fn lipschitz(&self, period: f64) -> f64 {
        match self {
            Profile::Flat(_) => 0.0,
            Profile::Harmonic { terms, .. } => terms
                .iter()
                .map(|h| 2.0 * PI * h.k as f64 / period * (h.sin_amp.abs() + h.cos_amp.abs()))
                .sum(),
            Profile::Piecewise(pts) => pts
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Upper bound on `|f''|`; zero for piecewise-linear profiles.
    pub fn curvature(&self, period: f64) -> f64 {
        match self {
            Profile::Harmonic { terms, .. } => terms
                .iter()
                .map(|h| (2.0 * PI * h.k as f64 / period).powi(2) * (h.sin_amp.abs() + h.cos_amp.abs()))
                .sum(),
            _ => 0.0,
        }
    }

    /// (min, max) of the profile over one period.
    pub fn range(&self, period: f64) -> (f64, f64) {
        match self {
            Profile::Flat(c) => (*c, *c),
            Profile::Piecewise(pts) => pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1))),
            Profile::Harmonic { .. } => {
                let samples = 4096;
                let h = period / samples as f64;
                let mut lo = (f64::INFINITY, 0.0);
                let mut hi = (f64::NEG_INFINITY, 0.0);
                for i in 0..samples {
                    let x = i as f64 * h;
                    let v = self.eval(period, x);
                    if v < lo.0 {
                        lo = (v, x);
                    }
                    if v > hi.0 {
                        hi = (v, x);
                    }
                }
                let fmin = golden(|x| self.eval(period, x), lo.1 - h, lo.1 + h);
                let fmax = -golden(|x| -self.eval(period, x), hi.1 - h, hi.1 + h);
                (fmin.min(lo.0), fmax.max(hi.0))
            }
        }
    }

    fn validate(&self, period: f64) -> Result<()> {
        if let Profile::Piecewise(pts) = self {
            if pts.len() < 2 {
                return Err(Error::InvalidGeometry("piecewise profile needs at least two samples".into()));
            }
            if pts[0].0 != 0.0 || (pts[pts.len() - 1].0 - period).abs() > 1e-12 * period {
                return Err(Error::InvalidGeometry("piecewise profile must span [0, period]".into()));
            }
            if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::InvalidGeometry("profile abscissae must increase strictly".into()));
            }
            if (pts[0].1 - pts[pts.len() - 1].1).abs() > 1e-12 {
                return Err(Error::InvalidGeometry("profile must satisfy f(0) = f(period)".into()));
            }
        }
        let l = self.lipschitz(period);
        if !l.is_finite() {
            return Err(Error::InvalidGeometry("profile is not Lipschitz".into()));
        }
        Ok(())
    }
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

/// Periodic cell `[0, period] x [-b, b]` split by the interface profile.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    pub period: f64,
    /// Artificial boundaries sit at `x2 = b` (fluid) and `x2 = -b` (solid).
    pub b: f64,
    /// Reference offset used in the truncation bound.
    pub b_prime: f64,
    pub profile: Profile,
}

impl GeometrySpec {
    /// `b' = max f` and `b = b' + margin`.
    pub fn with_margin(period: f64, profile: Profile, margin: f64) -> Self {
        let (_, fmax) = profile.range(period);
        Self { period, b: fmax + margin, b_prime: fmax, profile }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::InvalidGeometry(format!("period must be positive, got {}", self.period)));
        }
        self.profile.validate(self.period)?;
        let (fmin, fmax) = self.profile.range(self.period);
        if !(self.b > self.b_prime) {
            return Err(Error::InvalidGeometry(format!("need b > b', got b = {}, b' = {}", self.b, self.b_prime)));
        }
        if self.b_prime < fmax - 1e-12 {
            return Err(Error::InvalidGeometry(format!("need b' >= max f = {fmax}, got {}", self.b_prime)));
        }
        if !(-self.b < fmin) {
            return Err(Error::InvalidGeometry(format!("need -b < min f = {fmin}, got b = {}", self.b)));
        }
        Ok(())
    }

    /// `b - b'`, the distance entering the truncation bound.
    pub fn gap(&self) -> f64 {
        self.b - self.b_prime
    }

    pub fn profile_at(&self, x: f64) -> f64 {
        self.profile.eval(self.period, x)
    }
}
