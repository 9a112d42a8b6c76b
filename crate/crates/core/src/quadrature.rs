//! Gauss rules on the reference edge `[0, 1]` and collapsed (conical
//! product) Gauss rules on the reference triangle `{x, y ≥ 0, x + y ≤ 1}`.
//!
//! Every rule has strictly positive weights and interior points.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Highest polynomial degree [`triangle_rule`] supports.
pub const MAX_TRIANGLE_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    /// Polynomials up to this total degree are integrated exactly.
    pub exactness_degree: usize,
}

impl<P: Copy> QuadRule<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

pub type TriangleRule = QuadRule<[f64; 2]>;
pub type EdgeRule = QuadRule<f64>;

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // root of P_n on [-1, 1], descending in i
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let m = m as f64;
                let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        // recompute the derivative at the converged root
        let (mut p0, mut p1) = (1.0, x);
        for m in 2..=n {
            let m = m as f64;
            let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        let pnm1 = if n == 1 { 1.0 } else { p0 };
        if n > 1 {
            dp = n as f64 * (x * p1 - pnm1) / (x * x - 1.0);
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Gauss rule on `[0, 1]` with `⌈(degree + 1) / 2⌉` points.
pub fn edge_rule(degree: usize) -> EdgeRule {
    let n = (degree + 2) / 2;
    let (points, weights) = gauss_legendre(n.max(1));
    QuadRule { points, weights, exactness_degree: 2 * n.max(1) - 1 }
}

/// Rule on the reference triangle exact for all `x^a y^b` with
/// `a + b ≤ degree`, for `1 ≤ degree ≤ 20`.
///
/// Built from the Duffy map `(s, t) ↦ (s, (1 - s) t)`: the Jacobian factor
/// `1 - s` raises the degree in `s` by one, so `⌈(degree + 2) / 2⌉` Gauss
/// points are used in each direction.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if degree == 0 || degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::UnsupportedDegree { degree, min: 1, max: MAX_TRIANGLE_DEGREE });
    }
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&s, &ws) in x.iter().zip(&w) {
        for (&t, &wt) in x.iter().zip(&w) {
            points.push([s, (1.0 - s) * t]);
            weights.push(ws * wt * (1.0 - s));
        }
    }
    Ok(QuadRule { points, weights, exactness_degree: (2 * n - 2).min(MAX_TRIANGLE_DEGREE).max(degree) })
}
