//! Lagrange finite element spaces of degree `k ≥ 3`: reference bases,
//! global DOF numbering, evaluation and nodal interpolation.

mod basis;
mod dofmap;
mod field;
mod geometry;

use alloc::vec;
use alloc::vec::Vec;

pub use basis::{reference_basis, Jet, ReferenceBasis, Tabulation, MAX_DEGREE, MIN_DEGREE};
pub use dofmap::{build_dofmap, DofMap, INTERIOR};
pub use field::{combine, evaluate_field, interpolate, Derivative, FieldJet, FieldValue, Target};
pub use geometry::CellMap;

/// Coefficients of a discrete triple `(σ_h, u_h, λ_h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Length `4N`, components `σ₁₁, σ₁₂, σ₂₁, σ₂₂` stacked.
    pub sigma: Vec<f64>,
    /// Length `N`.
    pub u: Vec<f64>,
    /// One value per boundary DOF.
    pub lambda: Vec<f64>,
}

impl State {
    pub fn zeros(dofmap: &DofMap) -> Self {
        State {
            sigma: vec![0.0; dofmap.n_sigma_dofs()],
            u: vec![0.0; dofmap.n_dofs()],
            lambda: vec![0.0; dofmap.n_trace_dofs()],
        }
    }

    /// Coefficients of component `c` (`0..4`) of `σ_h`.
    pub fn sigma_component(&self, c: usize) -> &[f64] {
        let n = self.u.len();
        &self.sigma[c * n..(c + 1) * n]
    }

    pub fn matches(&self, dofmap: &DofMap) -> bool {
        self.sigma.len() == dofmap.n_sigma_dofs()
            && self.u.len() == dofmap.n_dofs()
            && self.lambda.len() == dofmap.n_trace_dofs()
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.iter().chain(&self.u).chain(&self.lambda).all(|v| v.is_finite())
    }
}

/// `σ_h` at a reference point of a cell, from basis values there.
pub fn sigma_at(state: &State, dofs: &[usize], values: &[f64]) -> crate::math::Mat2 {
    let n = state.u.len();
    let mut s = [0.0; 4];
    for (c, sc) in s.iter_mut().enumerate() {
        *sc = dofs.iter().zip(values).map(|(&d, &v)| state.sigma[c * n + d] * v).sum();
    }
    [[s[0], s[1]], [s[2], s[3]]]
}
