//! Solve, estimate, mark, refine.
//!
//! The truncation order is chosen once from the initial interface and kept for the whole
//! run. Marking is the maximum strategy `eta_K > tau * max eta`.

use std::time::{Duration, Instant};

use crate::assembly::{assemble_with, build_dof_map, AssemblyOptions, Solution};
use crate::estimator::{dof_count, indicators_with, ErrorIndicators, EstimatorOptions};
use crate::linsolve::solve;
use crate::mesh::{build_initial_mesh, refine, refine_uniform, GeometrySpec, Mesh};
use crate::oracle::{coupled_h1_error, ReferenceField};
use crate::params::{derive_modes, incident_trace_norms, select_truncation, PhysicalParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Stop once `eps_h` is at or below this value.
    pub tolerance: f64,
    /// Marking fraction in (0, 1).
    pub tau: f64,
    pub max_iterations: usize,
    /// No mesh with more unknowns than this is solved.
    pub max_dof: usize,
    pub dtn_tol: f64,
    pub initial_h: f64,
    pub edge_points: usize,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self { tolerance: 1e-3, tau: 0.5, max_iterations: 30, max_dof: 40_000, dtn_tol: 1e-8, initial_h: 0.5, edge_points: 8 }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("marking fraction tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.dtn_tol > 0.0 && self.dtn_tol.is_finite()) {
            return bad(format!("dtn_tol must be positive, got {}", self.dtn_tol));
        }
        if !(self.initial_h > 0.0 && self.initial_h.is_finite()) {
            return bad(format!("initial_h must be positive, got {}", self.initial_h));
        }
        if self.max_iterations == 0 || self.max_dof == 0 {
            return bad("max_iterations and max_dof must be at least 1".into());
        }
        if self.edge_points == 0 {
            return bad("edge_points must be at least 1".into());
        }
        Ok(())
    }
}

/// Why the loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    /// Iteration or DoF budget hit before the tolerance.
    BudgetExhausted,
    /// Every indicator vanished.
    NothingMarked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub dof: usize,
    pub n_trunc: usize,
    pub eps_h: f64,
    pub eps_n: f64,
    pub e_h: Option<f64>,
    pub residual: f64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub entries: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl ConvergenceRecord {
    pub fn last(&self) -> &IterationRecord {
        self.entries.last().expect("at least one iteration")
    }
}

/// State handed to the observer after each solve.
pub struct IterationView<'a> {
    pub record: &'a IterationRecord,
    pub mesh: &'a Mesh,
    pub solution: &'a Solution,
    pub indicators: &'a ErrorIndicators,
    /// Triangles selected for refinement; empty on the final iteration.
    pub marked: &'a [usize],
}

/// `{K : eta_K > tau * max eta}`.
pub fn mark(indicators: &ErrorIndicators, tau: f64) -> Vec<usize> {
    let max = indicators.eta_per_triangle.iter().copied().fold(0.0, f64::max);
    let threshold = tau * max;
    indicators.eta_per_triangle.iter().enumerate().filter(|&(_, &e)| e > threshold).map(|(k, _)| k).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Adaptive,
    Uniform,
}

pub fn run_adaptive(geometry: &GeometrySpec, params: &PhysicalParams, config: &AdaptConfig) -> Result<(Solution, ConvergenceRecord)> {
    run_adaptive_with(geometry, params, config, None, &mut |_| {})
}

pub fn run_uniform(geometry: &GeometrySpec, params: &PhysicalParams, config: &AdaptConfig) -> Result<(Solution, ConvergenceRecord)> {
    run_uniform_with(geometry, params, config, None, &mut |_| {})
}

pub fn run_adaptive_with(
    geometry: &GeometrySpec,
    params: &PhysicalParams,
    config: &AdaptConfig,
    reference: Option<&dyn ReferenceField>,
    observer: &mut dyn FnMut(&IterationView),
) -> Result<(Solution, ConvergenceRecord)> {
    run(geometry, params, config, reference, observer, Strategy::Adaptive)
}

pub fn run_uniform_with(
    geometry: &GeometrySpec,
    params: &PhysicalParams,
    config: &AdaptConfig,
    reference: Option<&dyn ReferenceField>,
    observer: &mut dyn FnMut(&IterationView),
) -> Result<(Solution, ConvergenceRecord)> {
    run(geometry, params, config, reference, observer, Strategy::Uniform)
}

fn run(
    geometry: &GeometrySpec,
    params: &PhysicalParams,
    config: &AdaptConfig,
    reference: Option<&dyn ReferenceField>,
    observer: &mut dyn FnMut(&IterationView),
    strategy: Strategy,
) -> Result<(Solution, ConvergenceRecord)> {
    params.validate()?;
    geometry.validate()?;
    config.validate()?;
    if (geometry.period - params.period).abs() > 1e-12 * params.period {
        return Err(Error::InvalidGeometry(format!(
            "geometry period {} differs from the physical period {}",
            geometry.period, params.period
        )));
    }
    let mut mesh = build_initial_mesh(geometry, config.initial_h)?;
    let incident_norm = incident_trace_norms(params, &mesh.interface_polyline())?;
    let n_trunc = select_truncation(params, geometry.gap(), incident_norm, config.dtn_tol)?;
    let modes = derive_modes(params, n_trunc)?;
    let est_opts = EstimatorOptions { edge_points: config.edge_points, ..Default::default() };
    let asm_opts = AssemblyOptions { edge_points: config.edge_points, ..Default::default() };

    let mut entries = Vec::new();
    loop {
        let start = Instant::now();
        let dofs = build_dof_map(&mesh, params);
        let system = assemble_with(&mesh, params, &modes, &dofs, &asm_opts)?;
        let (x, report) = solve(&system)?;
        let solution = dofs.expand(&x, n_trunc);
        let ind = indicators_with(&mesh, &solution, &modes, params, incident_norm, &est_opts)?;
        let e_h = reference.map(|r| coupled_h1_error(&solution, r, &mesh, params)).transpose()?;
        let iter = entries.len();
        let record = IterationRecord {
            iter,
            dof: ind.dof,
            n_trunc,
            eps_h: ind.eps_h,
            eps_n: ind.eps_n,
            e_h,
            residual: report.residual_norm,
            wall_time: start.elapsed(),
        };

        let stop = if ind.eps_h <= config.tolerance {
            Some(StopReason::Converged)
        } else if iter + 1 >= config.max_iterations {
            Some(StopReason::BudgetExhausted)
        } else {
            None
        };
        let marked = match (stop, strategy) {
            (Some(_), _) => Vec::new(),
            (None, Strategy::Adaptive) => mark(&ind, config.tau),
            (None, Strategy::Uniform) => (0..mesh.num_triangles()).collect(),
        };
        let stop = stop.or_else(|| marked.is_empty().then_some(StopReason::NothingMarked));
        let next = match stop {
            Some(_) => None,
            None => {
                let refined = match strategy {
                    Strategy::Adaptive => refine(&mesh, &marked)?,
                    Strategy::Uniform => refine_uniform(&mesh)?,
                };
                Some(refined)
            }
        };
        let stop = stop.or_else(|| {
            next.as_ref().filter(|m| dof_count(m) > config.max_dof).map(|_| StopReason::BudgetExhausted)
        });
        let shown: &[usize] = if stop.is_some() { &[] } else { &marked };
        observer(&IterationView { record: &record, mesh: &mesh, solution: &solution, indicators: &ind, marked: shown });
        entries.push(record);
        match (stop, next) {
            (None, Some(m)) => mesh = m,
            (stop, _) => {
                let stop = stop.unwrap_or(StopReason::BudgetExhausted);
                return Ok((solution, ConvergenceRecord { entries, stop }));
            }
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
