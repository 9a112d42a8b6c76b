//! Scalar helpers and 2×2 matrix algebra.

pub use libm::{exp, log2, sqrt};

/// A 2×2 matrix stored row-major as `[[a11, a12], [a21, a22]]`.
pub type Mat2 = [[f64; 2]; 2];

pub fn sq(x: f64) -> f64 {
    x * x
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Cofactor matrix: `cof [[a, b], [c, d]] = [[d, -b], [-c, a]]`.
pub fn cof2(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[1][0]], [-m[0][1], m[0][0]]]
}

/// Frobenius product `A : B`.
pub fn frobenius(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Index of the 2×2 tensor component `(a, b)` in component-major storage
/// (`σ₁₁, σ₁₂, σ₂₁, σ₂₂`).
pub const fn component(a: usize, b: usize) -> usize {
    2 * a + b
}
