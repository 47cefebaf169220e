//! Physical parameters, Rayleigh mode tables and the DtN truncation bound.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::quadrature::LineRule;
use crate::{Error, Result, C64, I};

/// Relative distance below which `|alpha_n|` is treated as equal to a wavenumber.
pub const WOOD_TOLERANCE: f64 = 1e-12;

/// Material and incidence constants of the fluid-solid grating problem.
///
/// `kappa` is an independent input; the sound speed is never used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Angular frequency.
    pub omega: f64,
    /// Fluid wavenumber.
    pub kappa: f64,
    /// Incident angle, strictly inside `(-pi/2, pi/2)`.
    pub theta: f64,
    /// Fluid mass density.
    pub rho_f: f64,
    /// First Lamé constant.
    pub lambda: f64,
    /// Shear modulus.
    pub mu: f64,
    /// Solid mass density.
    pub rho: f64,
    /// Grating period.
    pub period: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.kappa, self.theta, self.rho_f, self.lambda, self.mu, self.rho, self.period];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        if self.lambda + self.mu <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "lambda + mu must be positive, got {}",
                self.lambda + self.mu
            )));
        }
        for (name, v) in [("rho", self.rho), ("rho_f", self.rho_f), ("omega", self.omega), ("period", self.period)] {
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParams(format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        if self.theta.abs() >= FRAC_PI_2 {
            return Err(Error::InvalidParams(format!(
                "theta must lie strictly inside (-pi/2, pi/2), got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Compressional wavenumber `omega * sqrt(rho / (lambda + 2 mu))`.
    pub fn kappa1(&self) -> f64 {
        self.omega * (self.rho / (self.lambda + 2.0 * self.mu)).sqrt()
    }

    /// Shear wavenumber `omega * sqrt(rho / mu)`.
    pub fn kappa2(&self) -> f64 {
        self.omega * (self.rho / self.mu).sqrt()
    }

    /// Horizontal incident wavenumber `kappa sin(theta)`.
    pub fn alpha(&self) -> f64 {
        self.kappa * self.theta.sin()
    }

    /// Vertical incident wavenumber `kappa cos(theta)`.
    pub fn beta(&self) -> f64 {
        self.kappa * self.theta.cos()
    }

    pub fn alpha_n(&self, n: i64) -> f64 {
        self.alpha() + n as f64 * (2.0 * PI / self.period)
    }

    /// Quasi-periodic phase factor `exp(i alpha Lambda)`.
    pub fn bloch_phase(&self) -> C64 {
        C64::from_polar(1.0, self.alpha() * self.period)
    }
}

/// `sqrt(k^2 - a^2)` on the branch with nonnegative real and imaginary parts:
/// real for `|a| < k`, `i sqrt(a^2 - k^2)` otherwise.
pub fn vertical_wavenumber(k: f64, a: f64) -> C64 {
    let d = k * k - a * a;
    if d >= 0.0 {
        C64::new(d.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-d).sqrt())
    }
}

/// Per-mode Rayleigh quantities for one Fourier index `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub n: i64,
    pub alpha: f64,
    /// Fluid vertical wavenumber.
    pub beta: C64,
    /// Compressional vertical wavenumber.
    pub beta1: C64,
    /// Shear vertical wavenumber.
    pub beta2: C64,
    /// `alpha^2 + beta1 beta2`.
    pub chi: C64,
    /// Elastic DtN multiplier: traction coefficient = `m * displacement coefficient`.
    pub m: [[C64; 2]; 2],
}

impl Mode {
    /// Evaluates the mode without the anomaly check.
    pub fn new(params: &PhysicalParams, n: i64) -> Self {
        let alpha = params.alpha_n(n);
        let beta = vertical_wavenumber(params.kappa, alpha);
        let beta1 = vertical_wavenumber(params.kappa1(), alpha);
        let beta2 = vertical_wavenumber(params.kappa2(), alpha);
        let chi = alpha * alpha + beta1 * beta2;
        let rw2 = params.rho * params.omega * params.omega;
        let mu = params.mu;
        let f = I / chi;
        let off = 2.0 * mu * alpha * chi - rw2 * alpha;
        let m = [[f * rw2 * beta1, -f * off], [f * off, f * rw2 * beta2]];
        Self { n, alpha, beta, beta1, beta2, chi, m }
    }

    /// Hermitian part `-(M + M^*) / 2` as (a, b, c) for `[[a, b], [conj b, c]]`.
    pub fn negative_hermitian_part(&self) -> (f64, C64, f64) {
        let m = &self.m;
        let a = -m[0][0].re;
        let c = -m[1][1].re;
        let b = -(m[0][1] + m[1][0].conj()) * 0.5;
        (a, b, c)
    }
}

/// Mode quantities for all `|n| <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    n_max: usize,
    modes: Vec<Mode>,
}

impl ModeTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n: i64) -> Option<&Mode> {
        let idx = n + self.n_max as i64;
        if idx < 0 {
            return None;
        }
        self.modes.get(idx as usize)
    }

    /// Modes ordered by `n = -N..=N`.
    pub fn iter(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

fn check_wood(params: &PhysicalParams, n: i64) -> Result<()> {
    let a = params.alpha_n(n).abs();
    for k in [params.kappa, params.kappa1(), params.kappa2()] {
        if (a - k).abs() <= WOOD_TOLERANCE * k.max(a) {
            return Err(Error::WoodAnomaly { n, alpha_abs: a, wavenumber: k });
        }
    }
    Ok(())
}

pub fn derive_modes(params: &PhysicalParams, n_max: usize) -> Result<ModeTable> {
    params.validate()?;
    let n_max_i = n_max as i64;
    let mut modes = Vec::with_capacity(2 * n_max + 1);
    for n in -n_max_i..=n_max_i {
        check_wood(params, n)?;
        modes.push(Mode::new(params, n));
    }
    Ok(ModeTable { n_max, modes })
}

/// Supremum of the DtN truncation factor over `|n| > N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationBound {
    pub theta: f64,
    /// False when some `|n| > N` still propagates for `kappa` or `kappa2`; `theta`
    /// is then reported as 1.
    pub evanescent: bool,
    /// Index attaining the supremum (when evanescent).
    pub argmax: Option<i64>,
}

/// Consecutive strictly decreasing steps required before the scan stops.
const MONOTONE_RUN: usize = 5;

pub fn theta_bound(params: &PhysicalParams, gap: f64, n_trunc: usize) -> Result<TruncationBound> {
    params.validate()?;
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::InvalidParams(format!("geometry gap b - b' must be positive, got {gap}")));
    }
    let k = params.kappa;
    let k2 = params.kappa2();
    let kmax = k.max(k2);
    let mut best = 0.0f64;
    let mut argmax = None;
    for sign in [1i64, -1] {
        let mut prev: Option<(f64, f64)> = None;
        let mut run = 0usize;
        let mut m = n_trunc as i64 + 1;
        loop {
            let n = sign * m;
            let a = params.alpha_n(n).abs();
            if a <= k || a <= k2 {
                return Ok(TruncationBound { theta: 1.0, evanescent: false, argmax: None });
            }
            let acoustic = (-gap * vertical_wavenumber(k, a).norm()).exp();
            let elastic = m as f64 * (-gap * vertical_wavenumber(k2, a).norm()).exp();
            for v in [acoustic, elastic] {
                if v > best {
                    best = v;
                    argmax = Some(n);
                }
            }
            if let Some((pa, pe)) = prev {
                // Monotonicity only counts once every later index is evanescent.
                if acoustic < pa && elastic < pe && a > kmax {
                    run += 1;
                } else {
                    run = 0;
                }
            }
            prev = Some((acoustic, elastic));
            if run >= MONOTONE_RUN {
                break;
            }
            m += 1;
        }
    }
    Ok(TruncationBound { theta: best, evanescent: true, argmax })
}

/// Upper limit on the truncation order search.
const MAX_TRUNCATION: usize = 100_000;

/// Smallest positive `N` with `theta(N) * incident_norm <= tol` and all modes
/// beyond `N` evanescent.
pub fn select_truncation(params: &PhysicalParams, gap: f64, incident_norm: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("truncation tolerance must be positive, got {tol}")));
    }
    if !(incident_norm >= 0.0) {
        return Err(Error::InvalidParams(format!("incident norm must be nonnegative, got {incident_norm}")));
    }
    for n in 1..=MAX_TRUNCATION {
        let bound = theta_bound(params, gap, n)?;
        if bound.evanescent && bound.theta * incident_norm <= tol {
            return Ok(n);
        }
    }
    Err(Error::InvalidParams(format!("no truncation order up to {MAX_TRUNCATION} meets tolerance {tol}")))
}

/// `||p^i||_{L2} + ||d_n p^i||_{L2}` along a polyline interface traversed left to right.
pub fn incident_trace_norms(params: &PhysicalParams, interface: &[[f64; 2]]) -> Result<f64> {
    let rule = LineRule::gauss(8)?;
    let alpha = params.alpha();
    let beta = params.beta();
    let mut p_sq = 0.0;
    let mut dn_sq = 0.0;
    for w in interface.windows(2) {
        let (a, b) = (w[0], w[1]);
        let t = [b[0] - a[0], b[1] - a[1]];
        let len = t[0].hypot(t[1]);
        if len == 0.0 {
            return Err(Error::DegenerateEdge(len));
        }
        let n = [-t[1] / len, t[0] / len];
        for &(s, wt) in &rule.points {
            let x = [a[0] + s * t[0], a[1] + s * t[1]];
            let pi = C64::from_polar(1.0, alpha * x[0] - beta * x[1]);
            let dn = I * (alpha * n[0] - beta * n[1]) * pi;
            p_sq += wt * len * pi.norm_sqr();
            dn_sq += wt * len * dn.norm_sqr();
        }
    }
    Ok(p_sq.sqrt() + dn_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_6;

    fn example1(kappa: f64) -> PhysicalParams {
        PhysicalParams {
            omega: 1.0,
            kappa,
            theta: FRAC_PI_6,
            rho_f: 1.0,
            lambda: 1.0,
            mu: 1.0,
            rho: 1.0,
            period: 4.0,
        }
    }

    #[test]
    fn mode_zero_and_one_values() {
        let p = example1(1.0);
        let t = derive_modes(&p, 2).unwrap();
        let m0 = t.get(0).unwrap();
        assert!((m0.alpha - 0.5).abs() < 1e-15);
        assert!((m0.beta.re - 3f64.sqrt() / 2.0).abs() < 1e-15 && m0.beta.im == 0.0);
        let m1 = t.get(1).unwrap();
        assert!((m1.alpha - (0.5 + FRAC_PI_2)).abs() < 1e-15);
        // high-precision reference: i * 1.8133387513278472...
        assert_eq!(m1.beta.re, 0.0);
        assert!((m1.beta.im - 1.813_338_751_327_847).abs() < 1e-12);
    }

    #[test]
    fn example1_mode_zero_multiplier() {
        let p = example1(1.0);
        let m0 = Mode::new(&p, 0);
        assert!((m0.beta1.re - (1.0f64 / 3.0 - 0.25).sqrt()).abs() < 1e-15);
        assert!((m0.beta2.re - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((m0.chi - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((m0.m[0][0] - C64::new(0.0, 0.577_350_269_189_625_8)).norm() < 1e-12);
        assert!((m0.m[1][1] - C64::new(0.0, 1.732_050_807_568_877_2)).norm() < 1e-12);
        assert!(m0.m[0][1].norm() < 1e-15 && m0.m[1][0].norm() < 1e-15);
    }

    #[test]
    fn wood_anomaly_rejected() {
        // kappa = 2, theta = pi/6: alpha_0 = 1 = kappa2.
        let p = example1(2.0);
        assert!(matches!(derive_modes(&p, 3), Err(Error::WoodAnomaly { n: 0, .. })));
        // alpha_{-1} = -kappa exactly when alpha = pi/4 ... choose kappa so that |alpha_0| = kappa.
        let mut q = example1(1.0);
        q.theta = 0.0;
        q.period = PI; // alpha_n = 2n, kappa = 1: fine
        assert!(derive_modes(&q, 4).is_ok());
        q.kappa = 2.0; // |alpha_1| = 2 = kappa
        assert!(matches!(derive_modes(&q, 4), Err(Error::WoodAnomaly { .. })));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = example1(1.0);
        p.mu = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
        let mut p = example1(1.0);
        p.lambda = -1.5;
        assert!(p.validate().is_err());
        let mut p = example1(1.0);
        p.theta = FRAC_PI_2;
        assert!(p.validate().is_err());
        let mut p = example1(1.0);
        p.rho_f = -1.0;
        assert!(derive_modes(&p, 1).is_err());
    }

    /// Independent brute-force supremum over a fixed window of indices.
    fn brute_theta(p: &PhysicalParams, gap: f64, n: usize, horizon: i64) -> f64 {
        let mut best = 0.0f64;
        for m in (n as i64 + 1)..=horizon {
            for s in [m, -m] {
                let a = p.alpha_n(s);
                let ba = (a * a - p.kappa * p.kappa).sqrt();
                let b2 = (a * a - p.kappa2() * p.kappa2()).sqrt();
                best = best.max((-gap * ba).exp()).max(m as f64 * (-gap * b2).exp());
            }
        }
        best
    }

    #[test]
    fn theta_bound_matches_brute_force() {
        let p = example1(1.0);
        let b = theta_bound(&p, 1.0, 5).unwrap();
        assert!(b.evanescent);
        assert_eq!(b.argmax, Some(-6));
        let brute = brute_theta(&p, 1.0, 5, 60);
        assert!((b.theta - brute).abs() < 1e-15 * brute.max(1.0));
        // mpmath reference value
        assert!((b.theta - 8.444_561_593_377_187e-4).abs() < 1e-15);
        for n in 1..30 {
            let b = theta_bound(&p, 0.7, n).unwrap();
            let brute = brute_theta(&p, 0.7, n, 400);
            assert!((b.theta - brute).abs() <= 1e-14 * brute, "n={n}");
        }
    }

    #[test]
    fn theta_bound_flags_propagating_tail() {
        let p = example1(5.0);
        let b = theta_bound(&p, 1.0, 1).unwrap();
        assert!(!b.evanescent);
        assert_eq!(b.theta, 1.0);
        assert!(theta_bound(&p, 0.0, 1).is_err());
    }

    #[test]
    fn select_truncation_example1() {
        let p = example1(1.0);
        let norm = 2.0 + 2.0 * (PI / 6.0).cos();
        // linear-scan oracle (mpmath): gap 1 -> 14, gap 0.5 -> 29, gap 2 -> 7
        assert_eq!(select_truncation(&p, 1.0, norm, 1e-8).unwrap(), 14);
        assert_eq!(select_truncation(&p, 0.5, norm, 1e-8).unwrap(), 29);
        assert_eq!(select_truncation(&p, 2.0, norm, 1e-8).unwrap(), 7);
        // huge tolerance: first order past the propagating modes
        let n = select_truncation(&p, 1.0, norm, 1e6).unwrap();
        assert!(theta_bound(&p, 1.0, n).unwrap().evanescent);
        assert!(n == 1 || !theta_bound(&p, 1.0, n - 1).unwrap().evanescent);
    }

    #[test]
    fn incident_norm_on_flat_interface() {
        let p = example1(1.0);
        let line: Vec<[f64; 2]> = (0..=8).map(|i| [0.5 * i as f64, 0.0]).collect();
        let v = incident_trace_norms(&p, &line).unwrap();
        assert!((v - (2.0 + 3f64.sqrt())).abs() < 1e-12);

        let mut q = p;
        q.theta = 0.0;
        q.kappa = 3.0;
        let l = 2.5f64;
        let v = incident_trace_norms(&q, &[[0.0, 0.0], [l, 0.0]]).unwrap();
        assert!((v - (l.sqrt() + 3.0 * l.sqrt())).abs() < 1e-12);

        q.kappa = 0.0;
        let v = incident_trace_norms(&q, &[[0.0, 0.0], [l, 0.0]]).unwrap();
        assert!((v - l.sqrt()).abs() < 1e-12);

        assert!(matches!(
            incident_trace_norms(&p, &[[0.0, 0.0], [0.0, 0.0]]),
            Err(Error::DegenerateEdge(_))
        ));
    }
}
