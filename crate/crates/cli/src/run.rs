//! Runs the configured pipelines and writes their artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use dtn_afem::adapt::{run_adaptive_with, run_uniform_with, ConvergenceRecord, IterationView, StopReason};
use dtn_afem::oracle::{exact_flat, ExactFlatSolution, ReferenceField};
use thiserror::Error;

use crate::config::{ConfigError, Mode, RunConfig};
use crate::vtk::write_vtk;

pub const CSV_HEADER: &str = "iter,dof,N,eps_h,eps_N,e_h,wall_ms";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] dtn_afem::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// 2 configuration, 3 geometry or mesh, 4 solver, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use dtn_afem::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(e) => match e {
                E::InvalidParams(_) | E::WoodAnomaly { .. } => 2,
                E::InvalidGeometry(_)
                | E::ProfileTooSteep { .. }
                | E::DegenerateEdge(_)
                | E::DegenerateTriangle { .. }
                | E::UnclassifiableEdge(..)
                | E::PeriodicMismatch(_)
                | E::MeshFormat { .. }
                | E::InconsistentMesh => 3,
                E::SingularMatrix(_) | E::SingularSystem | E::QuadratureOverflow(_) => 4,
            },
            RunError::Io { .. } => 1,
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn stop_label(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Converged => "converged",
        StopReason::BudgetExhausted => "budget_exhausted",
        StopReason::NothingMarked => "nothing_marked",
    }
}

pub fn csv(record: &ConvergenceRecord, wall_time: bool) -> String {
    let mut s = String::new();
    writeln!(s, "{CSV_HEADER}").unwrap();
    for e in &record.entries {
        let e_h = e.e_h.map(|v| format!("{v:e}")).unwrap_or_default();
        let wall = if wall_time { format!("{:.3}", e.wall_time.as_secs_f64() * 1e3) } else { String::new() };
        writeln!(s, "{},{},{},{:e},{:e},{},{}", e.iter, e.dof, e.n_trunc, e.eps_h, e.eps_n, e_h, wall).unwrap();
    }
    writeln!(s, "# stop: {}", stop_label(record.stop)).unwrap();
    s
}

fn table(name: &str, record: &ConvergenceRecord) -> String {
    let mut s = String::new();
    writeln!(s, "{name} ({})", stop_label(record.stop)).unwrap();
    writeln!(s, "{:>4} {:>8} {:>4} {:>12} {:>12} {:>12}", "iter", "dof", "N", "eps_h", "eps_N", "e_h").unwrap();
    for e in &record.entries {
        let e_h = e.e_h.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
        writeln!(s, "{:>4} {:>8} {:>4} {:>12.4e} {:>12.4e} {:>12}", e.iter, e.dof, e.n_trunc, e.eps_h, e.eps_n, e_h).unwrap();
    }
    s
}

/// Result of one pipeline run.
pub struct SeriesOutput {
    pub name: &'static str,
    pub dir: PathBuf,
    pub record: ConvergenceRecord,
}

fn run_series(config: &RunConfig, adaptive: bool, dir: &Path, exact: Option<&ExactFlatSolution>) -> Result<ConvergenceRecord, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    let mut io_error = None;
    let mut observer = |v: &IterationView| {
        if io_error.is_some() {
            return;
        }
        let k = v.record.iter;
        let mut result = write(&dir.join(format!("mesh_{k}.txt")), &v.mesh.to_text());
        if result.is_ok() && config.export_vtk {
            let title = format!("dtn-afem solution, iteration {k}, {} unknowns", v.record.dof);
            result = write(&dir.join(format!("solution_{k}.vtk")), &write_vtk(v.mesh, v.solution, &title));
        }
        io_error = result.err();
    };
    let reference = exact.map(|e| e as &dyn ReferenceField);
    let (_, record) = if adaptive {
        run_adaptive_with(&config.geometry, &config.params, &config.adapt, reference, &mut observer)?
    } else {
        run_uniform_with(&config.geometry, &config.params, &config.adapt, reference, &mut observer)?
    };
    if let Some(e) = io_error {
        return Err(e);
    }
    write(&dir.join("convergence.csv"), &csv(&record, config.record_wall_time))?;
    Ok(record)
}

/// Runs every requested pipeline; with `mode = both` each series gets its own subdirectory.
pub fn run(config: &RunConfig) -> Result<Vec<SeriesOutput>, RunError> {
    let exact = if config.has_exact_solution() { Some(exact_flat(&config.params)?) } else { None };
    let series: &[(&'static str, bool)] = match config.mode {
        Mode::Adaptive => &[("adaptive", true)],
        Mode::Uniform => &[("uniform", false)],
        Mode::Both => &[("adaptive", true), ("uniform", false)],
    };
    let mut out = Vec::new();
    for &(name, adaptive) in series {
        let dir = if config.mode == Mode::Both { config.output_dir.join(name) } else { config.output_dir.clone() };
        let record = run_series(config, adaptive, &dir, exact.as_ref())?;
        out.push(SeriesOutput { name, dir, record });
    }
    Ok(out)
}

pub fn summary(outputs: &[SeriesOutput]) -> String {
    outputs.iter().map(|o| table(o.name, &o.record)).collect::<Vec<_>>().join("\n")
}
