use alloc::format;
use alloc::vec::Vec;

use super::basis::Jet;
use super::dofmap::DofMap;
use super::geometry::CellMap;
use crate::error::{Error, Result};
use crate::math::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Value(f64),
    Gradient([f64; 2]),
    Hessian(Mat2),
}

/// Value, physical gradient and elementwise physical Hessian of a field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: Mat2,
}

/// Combines reference basis jets with local coefficients and maps the
/// result to physical coordinates.
pub fn combine(jets: &[Jet], local: impl Iterator<Item = f64>, map: &CellMap) -> FieldJet {
    let mut v = 0.0;
    let mut g = [0.0; 2];
    let mut h = [0.0; 3];
    for (j, c) in jets.iter().zip(local) {
        v += c * j.v;
        g[0] += c * j.g[0];
        g[1] += c * j.g[1];
        h[0] += c * j.h[0];
        h[1] += c * j.h[1];
        h[2] += c * j.h[2];
    }
    FieldJet { value: v, grad: map.gradient(g), hess: map.hessian(h) }
}

impl DofMap {
    /// Field jet of the `V_h` function with coefficients `coeffs` at the
    /// reference point `xi` of `cell`.
    pub fn field_jet(&self, coeffs: &[f64], cell: usize, xi: [f64; 2]) -> FieldJet {
        let jets = self.basis().jets(xi);
        let dofs = self.cell_dofs(cell);
        combine(&jets, dofs.iter().map(|&d| coeffs[d]), &self.cell_map(cell))
    }

    /// Cell containing the physical point `x` and the matching reference
    /// coordinates, by linear search.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let tol = 1e-12;
        (0..self.mesh().num_cells()).find_map(|c| {
            let xi = self.cell_map(c).to_reference(x);
            (xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol).then_some((c, xi))
        })
    }
}

pub fn evaluate_field(coeffs: &[f64], dofmap: &DofMap, cell: usize, xi: [f64; 2], order: Derivative) -> FieldValue {
    let j = dofmap.field_jet(coeffs, cell, xi);
    match order {
        Derivative::Value => FieldValue::Value(j.value),
        Derivative::Gradient => FieldValue::Gradient(j.grad),
        Derivative::Hessian => FieldValue::Hessian(j.hess),
    }
}

/// Interpolation target space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// All DOFs of `V_h`.
    Volume,
    /// The trace space `L_h`, indexed like [`DofMap::boundary_dofs`].
    Trace,
}

/// Nodal interpolant: coefficients are the values of `f` at the DOF nodes.
pub fn interpolate(f: &dyn Fn([f64; 2]) -> f64, dofmap: &DofMap, target: Target) -> Result<Vec<f64>> {
    let eval = |d: usize| {
        let p = dofmap.dof_points()[d];
        let v = f(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Data(format!("non-finite value {v} at node ({}, {})", p[0], p[1])))
        }
    };
    match target {
        Target::Volume => (0..dofmap.n_dofs()).map(eval).collect(),
        Target::Trace => dofmap.boundary_dofs().iter().map(|&d| eval(d)).collect(),
    }
}
