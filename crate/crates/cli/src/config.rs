//! Flat `key = value` run configuration with per-scenario defaults.
//!
//! ```text
//! # Example 1 with a larger wavenumber
//! scenario = example1
//! kappa = 1.5
//! theta = pi/6
//! mode = both
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use dtn_afem::adapt::AdaptConfig;
use dtn_afem::mesh::{GeometrySpec, Harmonic, Profile};
use dtn_afem::params::PhysicalParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Example1,
    Example2,
    Example3,
    Example4,
    Custom,
}

impl Scenario {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "example1" => Scenario::Example1,
            "example2" => Scenario::Example2,
            "example3" => Scenario::Example3,
            "example4" => Scenario::Example4,
            "custom" => Scenario::Custom,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Adaptive,
    Uniform,
    Both,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "adaptive" => Ok(Mode::Adaptive),
            "uniform" => Ok(Mode::Uniform),
            "both" => Ok(Mode::Both),
            _ => Err(format!("mode must be adaptive, uniform or both, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub params: PhysicalParams,
    pub geometry: GeometrySpec,
    pub adapt: AdaptConfig,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub export_vtk: bool,
    /// Fill the `wall_ms` column; off by default so reruns give identical files.
    pub record_wall_time: bool,
}

impl RunConfig {
    /// True when the closed-form flat-interface solution applies.
    pub fn has_exact_solution(&self) -> bool {
        self.geometry.profile == Profile::Flat(0.0)
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "omega",
    "kappa",
    "theta",
    "rho_f",
    "lambda",
    "mu",
    "rho",
    "period",
    "b",
    "profile",
    "profile_offset",
    "amplitude",
    "teeth",
    "profile_points",
    "harmonics",
    "tolerance",
    "tau",
    "max_iterations",
    "max_dof",
    "dtn_tol",
    "initial_h",
    "edge_points",
    "mode",
    "output_dir",
    "export_vtk",
    "record_wall_time",
];

/// Reals may be written as plain numbers or as `[c*]pi[/d]`.
fn parse_real(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coef = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim().strip_suffix('*').unwrap_or(c).trim().parse::<f64>().ok()?,
        None => return None,
    };
    let v = coef * PI / den;
    v.is_finite().then_some(v)
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.map
            .get(key)
            .map(|(line, v)| parse_real(v).ok_or_else(|| parse_err(*line, format!("`{key}` expects a number, got `{v}`"))))
            .transpose()
    }

    fn int(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.map
            .get(key)
            .map(|(line, v)| {
                v.parse::<usize>()
                    .or_else(|e| v.parse::<f64>().ok().filter(|x| x.fract() == 0.0 && *x >= 0.0).map(|x| x as usize).ok_or(e))
                    .map_err(|_| parse_err(*line, format!("`{key}` expects a nonnegative integer, got `{v}`")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.map
            .get(key)
            .map(|(line, v)| match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(parse_err(*line, format!("`{key}` expects true or false, got `{v}`"))),
            })
            .transpose()
    }

    fn text(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }
}

fn split_pairs(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(parse_err(line, format!("expected `key = value`, got `{content}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(parse_err(line, format!("unknown key `{k}`")));
        }
        if v.is_empty() {
            return Err(parse_err(line, format!("`{k}` has no value")));
        }
        if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
            return Err(parse_err(line, format!("`{k}` already set on line {first}")));
        }
    }
    if map.is_empty() {
        return Err(parse_err(0, "configuration is empty"));
    }
    Ok(Entries { map })
}

struct Defaults {
    params: Option<PhysicalParams>,
    profile: &'static str,
    amplitude: f64,
    teeth: usize,
    initial_h: f64,
}

fn scenario_defaults(s: Scenario) -> Defaults {
    let ex1 = PhysicalParams {
        omega: 1.0,
        kappa: 1.0,
        theta: PI / 6.0,
        rho_f: 1.0,
        lambda: 1.0,
        mu: 1.0,
        rho: 1.0,
        period: 4.0,
    };
    match s {
        Scenario::Example1 => Defaults { params: Some(ex1), profile: "flat", amplitude: 0.0, teeth: 1, initial_h: 0.5 },
        Scenario::Example2 => Defaults {
            params: Some(PhysicalParams { theta: PI / 4.0, period: 1.0, ..ex1 }),
            profile: "sawtooth",
            amplitude: 0.5,
            teeth: 1,
            initial_h: 0.25,
        },
        Scenario::Example3 => Defaults {
            params: Some(PhysicalParams { theta: PI / 4.0, mu: 3.0, lambda: 2.0, period: 5.0, ..ex1 }),
            profile: "sawtooth",
            amplitude: 0.8,
            teeth: 3,
            initial_h: 0.5,
        },
        Scenario::Example4 => Defaults {
            params: Some(PhysicalParams { theta: PI / 5.0, mu: 4.0, lambda: 2.0, period: 2.0 * PI, ..ex1 }),
            profile: "curved",
            amplitude: 0.0,
            teeth: 1,
            initial_h: 0.5,
        },
        Scenario::Custom => Defaults { params: None, profile: "flat", amplitude: 0.5, teeth: 1, initial_h: 0.5 },
    }
}

fn parse_list<T>(line: usize, key: &str, value: &str, arity: usize, build: impl Fn(&[f64]) -> T) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|item| {
            let parts: Option<Vec<f64>> = item.split(':').map(|p| parse_real(p.trim())).collect();
            match parts {
                Some(p) if p.len() == arity => Ok(build(&p)),
                _ => Err(parse_err(line, format!("`{key}` entry `{}` needs {arity} colon-separated numbers", item.trim()))),
            }
        })
        .collect()
}

fn build_profile(e: &Entries, d: &Defaults, period: f64) -> Result<Profile, ConfigError> {
    let (line, kind) = e.text("profile").unwrap_or((0, d.profile));
    let amplitude = e.real("amplitude")?.unwrap_or(d.amplitude);
    let offset = e.real("profile_offset")?.unwrap_or(0.0);
    Ok(match kind {
        "flat" => Profile::Flat(offset),
        "sawtooth" => {
            let teeth = e.int("teeth")?.unwrap_or(d.teeth);
            if teeth == 0 {
                return Err(ConfigError::Validation("teeth must be at least 1".into()));
            }
            match Profile::sawtooth(period, teeth, amplitude) {
                Profile::Piecewise(pts) => Profile::Piecewise(pts.into_iter().map(|(x, y)| (x, y + offset)).collect()),
                other => other,
            }
        }
        "curved" => Profile::curved_example(),
        "harmonic" => {
            let Some((hl, h)) = e.text("harmonics") else {
                return Err(ConfigError::Validation("profile = harmonic requires `harmonics = k:sin:cos, ...`".into()));
            };
            let terms = parse_list(hl, "harmonics", h, 3, |p| (p[0], p[1], p[2]))?
                .into_iter()
                .map(|(k, s, c)| {
                    if k < 1.0 || k.fract() != 0.0 {
                        return Err(parse_err(hl, format!("harmonic index must be a positive integer, got {k}")));
                    }
                    Ok(Harmonic { k: k as u32, sin_amp: s, cos_amp: c })
                })
                .collect::<Result<_, _>>()?;
            Profile::Harmonic { offset, terms }
        }
        "piecewise" => {
            let Some((pl, pts)) = e.text("profile_points") else {
                return Err(ConfigError::Validation("profile = piecewise requires `profile_points = x:y, ...`".into()));
            };
            Profile::Piecewise(parse_list(pl, "profile_points", pts, 2, |p| (p[0], p[1]))?)
        }
        other => {
            return Err(parse_err(line, format!("profile must be flat, sawtooth, curved, harmonic or piecewise, got `{other}`")))
        }
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = split_pairs(text)?;
    let scenario = match e.text("scenario") {
        Some((line, s)) => Scenario::parse(s).ok_or_else(|| parse_err(line, format!("unknown scenario `{s}`")))?,
        None => return Err(parse_err(0, "`scenario` is required")),
    };
    let d = scenario_defaults(scenario);

    let field = |key: &str, default: Option<f64>| -> Result<f64, ConfigError> {
        e.real(key)?
            .or(default)
            .ok_or_else(|| ConfigError::Validation(format!("scenario custom requires `{key}`")))
    };
    let base = d.params;
    let params = PhysicalParams {
        omega: field("omega", base.map(|p| p.omega))?,
        kappa: field("kappa", base.map(|p| p.kappa))?,
        theta: field("theta", base.map(|p| p.theta))?,
        rho_f: field("rho_f", base.map(|p| p.rho_f))?,
        lambda: field("lambda", base.map(|p| p.lambda))?,
        mu: field("mu", base.map(|p| p.mu))?,
        rho: field("rho", base.map(|p| p.rho))?,
        period: field("period", base.map(|p| p.period))?,
    };
    params.validate().map_err(|err| ConfigError::Validation(err.to_string()))?;

    let profile = build_profile(&e, &d, params.period)?;
    let mut geometry = GeometrySpec::with_margin(params.period, profile, 0.5);
    if let Some(b) = e.real("b")? {
        geometry.b = b;
    }
    geometry.validate().map_err(|err| ConfigError::Validation(err.to_string()))?;

    let defaults = AdaptConfig { initial_h: d.initial_h, ..AdaptConfig::default() };
    let adapt = AdaptConfig {
        tolerance: e.real("tolerance")?.unwrap_or(defaults.tolerance),
        tau: e.real("tau")?.unwrap_or(defaults.tau),
        max_iterations: e.int("max_iterations")?.unwrap_or(defaults.max_iterations),
        max_dof: e.int("max_dof")?.unwrap_or(defaults.max_dof),
        dtn_tol: e.real("dtn_tol")?.unwrap_or(defaults.dtn_tol),
        initial_h: e.real("initial_h")?.unwrap_or(defaults.initial_h),
        edge_points: e.int("edge_points")?.unwrap_or(defaults.edge_points),
    };
    adapt.validate().map_err(|err| ConfigError::Validation(err.to_string()))?;

    let mode = match e.text("mode") {
        Some((line, m)) => m.parse().map_err(|msg| parse_err(line, msg))?,
        None => Mode::Adaptive,
    };
    Ok(RunConfig {
        scenario,
        params,
        geometry,
        adapt,
        mode,
        output_dir: PathBuf::from(e.text("output_dir").map_or("out", |(_, v)| v)),
        export_vtk: e.flag("export_vtk")?.unwrap_or(false),
        record_wall_time: e.flag("record_wall_time")?.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_with_override() {
        let c = parse_config("scenario=example1\nkappa=1").unwrap();
        assert_eq!(c.scenario, Scenario::Example1);
        assert_eq!(c.params.kappa, 1.0);
        assert_eq!(c.params.period, 4.0);
        assert!((c.params.theta - PI / 6.0).abs() < 1e-15);
        assert_eq!(c.geometry.profile, Profile::Flat(0.0));
        assert_eq!(c.geometry.b, 0.5);
        assert!(c.has_exact_solution());
        let c = parse_config("scenario = example1\nkappa = 1.5 # comment\n").unwrap();
        assert_eq!(c.params.kappa, 1.5);
    }

    #[test]
    fn tau_out_of_range() {
        assert!(matches!(parse_config("scenario=example1\ntau=1.5"), Err(ConfigError::Validation(_))));
    }

    #[test]
    fn empty_and_malformed_text() {
        assert!(matches!(parse_config(""), Err(ConfigError::Parse { .. })));
        assert!(matches!(parse_config("# nothing\n\n"), Err(ConfigError::Parse { .. })));
        assert_eq!(
            parse_config("scenario=example1\nfoo=1"),
            Err(ConfigError::Parse { line: 2, message: "unknown key `foo`".into() })
        );
        assert!(matches!(parse_config("scenario=example1\nkappa"), Err(ConfigError::Parse { line: 2, .. })));
        assert!(matches!(parse_config("scenario=example1\nkappa=x"), Err(ConfigError::Parse { line: 2, .. })));
        assert!(matches!(parse_config("scenario=example1\nkappa=1\nkappa=2"), Err(ConfigError::Parse { line: 3, .. })));
        assert!(matches!(parse_config("kappa=2"), Err(ConfigError::Parse { .. })));
        assert!(matches!(parse_config("scenario=example9"), Err(ConfigError::Parse { line: 1, .. })));
    }

    #[test]
    fn example4_profile_and_defaults() {
        let c = parse_config("scenario=example4").unwrap();
        assert!((c.params.period - 2.0 * PI).abs() < 1e-15);
        assert!((c.params.theta - PI / 5.0).abs() < 1e-15);
        assert_eq!((c.params.mu, c.params.lambda), (4.0, 2.0));
        for x in [0.0, 0.9, 3.3, 6.0] {
            let expect = 0.1 + 0.15 * f64::sin(x) + 0.35 * f64::cos(5.0 * x);
            assert!((c.geometry.profile_at(x) - expect).abs() < 1e-14);
        }
        assert!(!c.has_exact_solution());
        assert!((c.geometry.b - c.geometry.b_prime - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pi_expressions() {
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("pi/6"), Some(PI / 6.0));
        assert_eq!(parse_real("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_real("0.5pi/2"), Some(0.25 * PI));
        assert_eq!(parse_real("1e-3"), Some(1e-3));
        assert_eq!(parse_real("pie"), None);
        assert_eq!(parse_real("inf"), None);
    }

    #[test]
    fn custom_requires_physics() {
        assert!(matches!(parse_config("scenario=custom"), Err(ConfigError::Validation(_))));
        let text = "scenario=custom\nomega=1\nkappa=1\ntheta=0.3\nrho_f=1\nlambda=2\nmu=1\nrho=1\nperiod=2\n\
                    profile=piecewise\nprofile_points=0:0, 1:0.3, 2:0\nb=1.5";
        let c = parse_config(text).unwrap();
        assert_eq!(c.geometry.b, 1.5);
        assert!((c.geometry.b_prime - 0.3).abs() < 1e-15);
        let text = "scenario=custom\nomega=1\nkappa=1\ntheta=0.3\nrho_f=1\nlambda=2\nmu=1\nrho=1\nperiod=2\n\
                    profile=harmonic\nharmonics=1:0.1:0, 2:0:0.05";
        assert!(matches!(parse_config(text).unwrap().geometry.profile, Profile::Harmonic { .. }));
    }

    #[test]
    fn geometry_and_physics_violations() {
        assert!(matches!(parse_config("scenario=example1\nb=-1"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("scenario=example1\nmu=0"), Err(ConfigError::Validation(_))));
        assert!(matches!(parse_config("scenario=example2\nteeth=0"), Err(ConfigError::Validation(_))));
    }

    #[test]
    fn mode_and_flags() {
        let c = parse_config("scenario=example2\nmode=both\nexport_vtk=true\noutput_dir=runs/x").unwrap();
        assert_eq!(c.mode, Mode::Both);
        assert!(c.export_vtk);
        assert_eq!(c.output_dir, PathBuf::from("runs/x"));
        assert!(matches!(parse_config("scenario=example2\nmode=fast"), Err(ConfigError::Parse { line: 2, .. })));
    }
}
