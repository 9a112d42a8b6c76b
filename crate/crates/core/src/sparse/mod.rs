//! Sparse matrices and the linear solvers used by the Newton iteration.

mod banded;
mod csr;
mod gmres;

pub use banded::{rcm_ordering, BandedLu};
pub use csr::{CsrMatrix, TripletBuilder};
pub use gmres::{gmres, GmresOptions};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::norm2;

/// Relative residual a direct solve must reach.
pub const SOLVE_REL_TOL: f64 = 1e-10;
const SOLVE_ABS_TOL: f64 = 1e-14;

/// Solves `A x = b` with a reordered banded LU factorization followed by
/// one step of iterative refinement.
pub fn solve_linear(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = BandedLu::factor(a)?;
    let mut x = lu.solve(b);
    let mut r = a.mul_vec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let dx = lu.solve(&r);
    for (xi, d) in x.iter_mut().zip(&dx) {
        *xi += d;
    }
    let res = a.residual_norm(&x, b);
    let bound = SOLVE_ABS_TOL.max(SOLVE_REL_TOL * norm2(b));
    if !(res <= bound) {
        return Err(Error::LinearSolver { iterations: 1, residual: res / norm2(b).max(f64::MIN_POSITIVE) });
    }
    Ok(x)
}
