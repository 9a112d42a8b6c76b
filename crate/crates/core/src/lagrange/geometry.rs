use crate::math::Mat2;

/// Affine map `x = x₀ + J ξ` from the reference triangle onto a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMap {
    pub origin: [f64; 2],
    pub jacobian: Mat2,
    pub inverse: Mat2,
    /// `det J = 2 |K|`.
    pub det: f64,
}

impl CellMap {
    pub fn new(p: &[[f64; 2]; 3]) -> Self {
        let jacobian = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = crate::math::det2(&jacobian);
        let inverse = [
            [jacobian[1][1] / det, -jacobian[0][1] / det],
            [-jacobian[1][0] / det, jacobian[0][0] / det],
        ];
        CellMap { origin: p[0], jacobian, inverse, det }
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1], self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1]]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        let a = &self.inverse;
        [a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]]
    }

    /// Physical gradient `J⁻ᵀ ∇_ξ`.
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let a = &self.inverse;
        [a[0][0] * g[0] + a[1][0] * g[1], a[0][1] * g[0] + a[1][1] * g[1]]
    }

    /// Physical Hessian `J⁻ᵀ H_ξ J⁻¹` from reference `[xx, xy, yy]`; the map
    /// is affine so there is no curvature term.
    pub fn hessian(&self, h: [f64; 3]) -> Mat2 {
        let a = &self.inverse;
        let hr = [[h[0], h[1]], [h[1], h[2]]];
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, o) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        s += a[p][i] * hr[p][q] * a[q][j];
                    }
                }
                *o = s;
            }
        }
        out
    }

    /// Integration weight factor `|det J|`.
    pub fn measure(&self) -> f64 {
        self.det.abs()
    }
}
