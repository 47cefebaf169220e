//! Adaptive finite element solver for time-harmonic acoustic waves scattered by a
//! periodic elastic grating.
//!
//! The unbounded fluid and solid half-spaces are truncated at `x2 = b` and
//! `x2 = -b` with Dirichlet-to-Neumann (DtN) boundary conditions expressed as
//! Fourier-mode multipliers. The coupled problem (scattered pressure `p` in the
//! fluid, displacement `u` in the solid) is discretized with quasi-periodic P1
//! elements, a residual-type a posteriori estimator drives newest-vertex
//! bisection, and the DtN series truncation order is chosen a priori so that the
//! truncation part of the estimate stays below a tolerance.
//!
//! Module map:
//!
//! * [`params`] - physical constants, per-mode tables, truncation bound.
//! * [`mesh`] - periodic-cell triangulation, edge classes, bisection refinement.
//! * [`assembly`] - dof map, sesquilinear forms, DtN low-rank blocks.
//! * [`linsolve`] - sparse complex direct solve.
//! * [`estimator`] - element residuals, edge jumps, global indicators.
//! * [`adapt`] - solve/estimate/mark/refine driver.
//! * [`oracle`] - closed-form flat-interface solution and error norms.

pub mod adapt;
pub mod assembly;
pub mod error;
pub mod estimator;
pub mod linsolve;
pub mod mesh;
pub mod oracle;
pub mod params;
pub mod quadrature;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
