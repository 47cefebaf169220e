//! Sparse direct solve of the assembled system.
//!
//! The low-rank DtN blocks are expanded into the sparse pattern and the whole matrix is
//! factored with a fill-reducing column ordering and partial row pivoting (faer). One step
//! of iterative refinement follows the first solve.

use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Col};

use crate::assembly::LinearSystem;
use crate::{Error, Result, C64};

/// Relative residual above which a warning is attached to the report.
pub const RESIDUAL_TARGET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `||A x - b|| / ||b||`, or `||A x||` when `b = 0`.
    pub residual_norm: f64,
    /// Stored entries of the expanded matrix handed to the factorization.
    pub factor_nonzeros: usize,
    pub elapsed: Duration,
    pub warning: Option<String>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn solve(system: &LinearSystem) -> Result<(Vec<C64>, SolveReport)> {
    let start = Instant::now();
    let n = system.dim();
    if n == 0 {
        return Err(Error::SingularMatrix("empty system".into()));
    }
    let triplets: Vec<Triplet<usize, usize, c64>> =
        system.expanded_triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let nnz = triplets.len();
    let a = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularMatrix(format!("matrix construction failed: {e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::SingularMatrix(format!("factorization failed: {e:?}")))?;

    let b = system.rhs();
    let solve_once = |rhs: &[C64]| -> Result<Vec<C64>> {
        let col = Col::<c64>::from_fn(n, |i| rhs[i]);
        let x = lu.solve(&col);
        let out: Vec<C64> = (0..n).map(|i| x[i]).collect();
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularMatrix("non-finite solution, pivot breakdown".into()));
        }
        Ok(out)
    };
    let mut x = solve_once(b)?;
    let residual = |x: &[C64]| -> Vec<C64> { system.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect() };
    let r = residual(&x);
    let dx = solve_once(&r)?;
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += di;
    }
    let bnorm = norm(b);
    let rnorm = norm(&residual(&x));
    let residual_norm = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };
    if !residual_norm.is_finite() {
        return Err(Error::SingularMatrix("non-finite residual".into()));
    }
    let warning = (residual_norm > RESIDUAL_TARGET)
        .then(|| format!("relative residual {residual_norm:.3e} exceeds {RESIDUAL_TARGET:e}"));
    Ok((x, SolveReport { residual_norm, factor_nonzeros: nnz, elapsed: start.elapsed(), warning }))
}
