use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{norm2, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Stop once `‖b − A x‖ ≤ rel_tol ‖b‖`.
    pub rel_tol: f64,
    pub restart: usize,
    pub max_iters: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { rel_tol: 1e-12, restart: 200, max_iters: 2000 }
    }
}

/// Right-preconditioned restarted GMRES. `op` computes `y = A x`,
/// `precond` applies an approximate inverse of `A`.
///
/// Returns the solution and the number of iterations.
pub fn gmres(
    op: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: &GmresOptions,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let target = opts.rel_tol * bnorm;
    let m = opts.restart.max(1);
    let mut total = 0;
    let mut ax = vec![0.0; n];
    loop {
        op(&x, &mut ax);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta <= target {
            return Ok((x, total));
        }
        if total >= opts.max_iters || !beta.is_finite() {
            return Err(Error::LinearSolver { iterations: total, residual: beta / bnorm });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(m);
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::with_capacity(m), Vec::with_capacity(m));
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut w = vec![0.0; n];
        let mut inner = 0;
        while inner < m && total < opts.max_iters {
            let z = precond(&basis[inner]);
            op(&z, &mut w);
            zs.push(z);
            let mut h = vec![0.0; inner + 2];
            for (k, v) in basis.iter().enumerate() {
                let hk: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                h[k] = hk;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hk * vi;
                }
            }
            let wn = norm2(&w);
            h[inner + 1] = wn;
            for k in 0..inner {
                let t = cs[k] * h[k] + sn[k] * h[k + 1];
                h[k + 1] = -sn[k] * h[k] + cs[k] * h[k + 1];
                h[k] = t;
            }
            let denom = sqrt(h[inner] * h[inner] + h[inner + 1] * h[inner + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[inner] / denom, h[inner + 1] / denom) };
            cs.push(c);
            sn.push(s);
            h[inner] = denom;
            h[inner + 1] = 0.0;
            g[inner + 1] = -s * g[inner];
            g[inner] *= c;
            hess.push(h);
            inner += 1;
            total += 1;
            if g[inner].abs() <= target || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; inner];
        for i in (0..inner).rev() {
            let mut s = g[i];
            for j in i + 1..inner {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (yj, z) in y.iter().zip(&zs) {
            for (xi, zi) in x.iter_mut().zip(z) {
                *xi += yj * zi;
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver { iterations: total, residual: f64::NAN });
        }
    }
}
