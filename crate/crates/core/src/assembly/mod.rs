//! Discrete operators of the mixed system
//!
//! ```text
//! (σ_h, τ)_Ω + (∇·τ, Du_h)_Ω − ⟨Du_h, τ n⟩_∂Ω = 0      ∀ τ ∈ Σ_h
//! (det σ_h, v)_Ω = (f, v)_Ω                          ∀ v ∈ V_h ∩ H¹₀
//! u_h = g_h on ∂Ω
//! ```
//!
//! With `M` the `Σ_h` mass matrix and `B` the Hessian-reconstruction
//! operator the first line reads `M s + B u = 0`. The determinant equation
//! is tested against interior basis functions only, since the boundary
//! values of `u_h` are imposed strongly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lagrange::{sigma_at, DofMap, State, Tabulation, INTERIOR};
use crate::math::{cof2, det2, sqrt};
use crate::quadrature::{edge_rule, triangle_rule, TriangleRule, MAX_TRIANGLE_DEGREE};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Quadrature degree for mass and Hessian-reconstruction terms (`2k`).
pub fn linear_degree(dofmap: &DofMap) -> usize {
    2 * dofmap.degree()
}

/// Quadrature degree for the determinant and cofactor terms (`3k`).
pub fn nonlinear_degree(dofmap: &DofMap) -> usize {
    (3 * dofmap.degree()).min(MAX_TRIANGLE_DEGREE)
}

/// A triangle rule with the basis tabulated at its points.
#[derive(Debug, Clone)]
pub struct TabulatedRule {
    pub rule: TriangleRule,
    pub tab: Tabulation,
}

impl TabulatedRule {
    pub fn new(dofmap: &DofMap, degree: usize) -> Result<Self> {
        let rule = triangle_rule(degree.min(MAX_TRIANGLE_DEGREE))?;
        let tab = dofmap.basis().tabulate(&rule.points);
        Ok(TabulatedRule { rule, tab })
    }
}

/// Scalar `V_h` mass matrix `(φ_j, φ_i)_Ω`.
pub fn assemble_scalar_mass(dofmap: &DofMap) -> CsrMatrix {
    let q = TabulatedRule::new(dofmap, linear_degree(dofmap)).expect("supported degree");
    let nloc = dofmap.n_local();
    let mut t = TripletBuilder::with_capacity(dofmap.n_dofs(), dofmap.n_dofs(), nloc * nloc * dofmap.mesh().num_cells());
    let mut local = vec![0.0; nloc * nloc];
    for cell in 0..dofmap.mesh().num_cells() {
        let meas = dofmap.cell_map(cell).measure();
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            let jets = q.tab.at(qi);
            let wq = w * meas;
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] += wq * (jets[i].v * jets[j].v);
                }
            }
        }
        let dofs = dofmap.cell_dofs(cell);
        for i in 0..nloc {
            for j in 0..nloc {
                t.add(dofs[i], dofs[j], local[i * nloc + j]);
            }
        }
    }
    t.finalize()
}

/// `Σ_h` mass matrix: four copies of the scalar mass matrix on the diagonal.
pub fn assemble_mass_sigma(dofmap: &DofMap) -> CsrMatrix {
    let m = assemble_scalar_mass(dofmap);
    let n = dofmap.n_dofs();
    let mut t = TripletBuilder::with_capacity(4 * n, 4 * n, 4 * m.nnz());
    for c in 0..4 {
        for i in 0..n {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                t.add(c * n + i, c * n + j, v);
            }
        }
    }
    t.finalize()
}

/// Scalar stiffness matrix `(∇φ_j, ∇φ_i)_Ω`.
pub fn assemble_stiffness(dofmap: &DofMap) -> CsrMatrix {
    let q = TabulatedRule::new(dofmap, linear_degree(dofmap)).expect("supported degree");
    let nloc = dofmap.n_local();
    let mut t = TripletBuilder::with_capacity(dofmap.n_dofs(), dofmap.n_dofs(), nloc * nloc * dofmap.mesh().num_cells());
    let mut local = vec![0.0; nloc * nloc];
    let mut grads = vec![[0.0; 2]; nloc];
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            for (g, j) in grads.iter_mut().zip(q.tab.at(qi)) {
                *g = map.gradient(j.g);
            }
            let wq = w * map.measure();
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] += wq * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
        }
        let dofs = dofmap.cell_dofs(cell);
        for i in 0..nloc {
            for j in 0..nloc {
                t.add(dofs[i], dofs[j], local[i * nloc + j]);
            }
        }
    }
    t.finalize()
}

/// Hessian-reconstruction operator `B` (`4N × N`):
///
/// `B[(ab, i), j] = (∂_b φ_i, ∂_a φ_j)_Ω − ⟨∂_a φ_j, φ_i n_b⟩_∂Ω`,
///
/// the bilinear form `(∇·τ, Dφ_j) − ⟨Dφ_j, τ n⟩` for `τ = φ_i e_a e_bᵀ`.
pub fn assemble_hessian_op(dofmap: &DofMap) -> CsrMatrix {
    let n = dofmap.n_dofs();
    let nloc = dofmap.n_local();
    let mesh = dofmap.mesh();
    let q = TabulatedRule::new(dofmap, linear_degree(dofmap)).expect("supported degree");
    let mut t = TripletBuilder::with_capacity(4 * n, n, 4 * nloc * nloc * mesh.num_cells());
    let mut grads = vec![[0.0; 2]; nloc];
    let mut local = vec![0.0; 4 * nloc * nloc];
    let idx = |c: usize, i: usize, j: usize| (c * nloc + i) * nloc + j;

    for cell in 0..mesh.num_cells() {
        let map = dofmap.cell_map(cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            for (g, j) in grads.iter_mut().zip(q.tab.at(qi)) {
                *g = map.gradient(j.g);
            }
            let wq = w * map.measure();
            for a in 0..2 {
                for b in 0..2 {
                    let c = 2 * a + b;
                    for i in 0..nloc {
                        let gi = wq * grads[i][b];
                        for j in 0..nloc {
                            local[idx(c, i, j)] += gi * grads[j][a];
                        }
                    }
                }
            }
        }
        boundary_terms(dofmap, cell, &mut local);
        let dofs = dofmap.cell_dofs(cell);
        for c in 0..4 {
            for i in 0..nloc {
                for j in 0..nloc {
                    let v = local[idx(c, i, j)];
                    if v != 0.0 {
                        t.add(c * n + dofs[i], dofs[j], v);
                    }
                }
            }
        }
    }
    t.finalize()
}

/// Adds `−⟨∂_a φ_j, φ_i n_b⟩_E` over the boundary edges `E` of `cell`.
fn boundary_terms(dofmap: &DofMap, cell: usize, local: &mut [f64]) {
    let mesh = dofmap.mesh();
    let nloc = dofmap.n_local();
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let map = dofmap.cell_map(cell);
    let rule = edge_rule(linear_degree(dofmap));
    for (le, _) in mesh.cell_boundary_edges(cell) {
        let (s, e) = (corners[(le + 1) % 3], corners[(le + 2) % 3]);
        let (pa, pb) = (map.to_physical(s), map.to_physical(e));
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = sqrt(dx * dx + dy * dy);
        // counterclockwise traversal: outward normal is the tangent turned clockwise
        let normal = [dy / len, -dx / len];
        for (tq, w) in rule.iter() {
            let xi = [s[0] + tq * (e[0] - s[0]), s[1] + tq * (e[1] - s[1])];
            let jets = dofmap.basis().jets(xi);
            let wq = w * len;
            for a in 0..2 {
                for b in 0..2 {
                    let c = 2 * a + b;
                    for i in 0..nloc {
                        let vi = wq * jets[i].v * normal[b];
                        if vi == 0.0 {
                            continue;
                        }
                        for j in 0..nloc {
                            let ga = map.gradient(jets[j].g)[a];
                            local[(c * nloc + i) * nloc + j] -= vi * ga;
                        }
                    }
                }
            }
        }
    }
}

/// `(det σ_h − f, φ_i)_Ω` for every interior DOF `i`, in the order of
/// [`DofMap::interior_dofs`].
pub fn det_residual(state: &State, dofmap: &DofMap, f: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
    let q = TabulatedRule::new(dofmap, nonlinear_degree(dofmap)).expect("supported degree");
    det_residual_with(state, dofmap, f, &q, &interior_numbering(dofmap))
}

pub(crate) fn det_residual_with(
    state: &State,
    dofmap: &DofMap,
    f: &dyn Fn([f64; 2]) -> f64,
    q: &TabulatedRule,
    rows: &[usize],
) -> Vec<f64> {
    let n_rows = rows.iter().filter(|&&r| r != INTERIOR).count();
    let mut out = vec![0.0; n_rows];
    let mut values = vec![0.0; dofmap.n_local()];
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            for (v, j) in values.iter_mut().zip(q.tab.at(qi)) {
                *v = j.v;
            }
            let sigma = sigma_at(state, dofs, &values);
            let x = map.to_physical(q.rule.points[qi]);
            let r = w * map.measure() * (det2(&sigma) - f(x));
            for (&d, &v) in dofs.iter().zip(&values) {
                let row = rows[d];
                if row != INTERIOR {
                    out[row] += r * v;
                }
            }
        }
    }
    out
}

/// Row index of every interior DOF, [`INTERIOR`] for boundary DOFs.
pub fn interior_numbering(dofmap: &DofMap) -> Vec<usize> {
    let mut rows = vec![INTERIOR; dofmap.n_dofs()];
    for (r, d) in dofmap.interior_dofs().into_iter().enumerate() {
        rows[d] = r;
    }
    rows
}

/// Derivative of [`det_residual`] with respect to `σ`:
/// `C[i, (ab, j)] = ((cof σ_h)_ab φ_j, φ_i)_Ω`, rows interior DOFs.
pub fn cof_jacobian_block(state: &State, dofmap: &DofMap) -> CsrMatrix {
    let q = TabulatedRule::new(dofmap, nonlinear_degree(dofmap)).expect("supported degree");
    cof_jacobian_with(state, dofmap, &q, &interior_numbering(dofmap))
}

pub(crate) fn cof_jacobian_with(state: &State, dofmap: &DofMap, q: &TabulatedRule, rows: &[usize]) -> CsrMatrix {
    let n = dofmap.n_dofs();
    let nloc = dofmap.n_local();
    let n_rows = rows.iter().filter(|&&r| r != INTERIOR).count();
    let mut t = TripletBuilder::with_capacity(n_rows, 4 * n, 4 * nloc * nloc * dofmap.mesh().num_cells());
    let mut values = vec![0.0; nloc];
    let mut local = vec![0.0; 4 * nloc * nloc];
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            for (v, j) in values.iter_mut().zip(q.tab.at(qi)) {
                *v = j.v;
            }
            let cof = cof2(&sigma_at(state, dofs, &values));
            let wq = w * map.measure();
            for c in 0..4 {
                let wc = wq * cof[c / 2][c % 2];
                for i in 0..nloc {
                    let wi = wc * values[i];
                    for j in 0..nloc {
                        local[(c * nloc + i) * nloc + j] += wi * values[j];
                    }
                }
            }
        }
        for i in 0..nloc {
            let row = rows[dofs[i]];
            if row == INTERIOR {
                continue;
            }
            for c in 0..4 {
                for j in 0..nloc {
                    t.add(row, c * n + dofs[j], local[(c * nloc + i) * nloc + j]);
                }
            }
        }
    }
    t.finalize()
}

/// `(cof σ_h ∇φ_j, ∇φ_i)_Ω` over interior rows and columns. Since the rows
/// of an exact cofactor field are divergence free, this is the principal
/// part of `v ↦ (cof σ_h : D²v, φ_i)` and serves as a preconditioner for the
/// linearized determinant equation.
pub fn assemble_cofactor_stiffness(state: &State, dofmap: &DofMap) -> CsrMatrix {
    let q = TabulatedRule::new(dofmap, nonlinear_degree(dofmap)).expect("supported degree");
    let rows = interior_numbering(dofmap);
    let n_rows = rows.iter().filter(|&&r| r != INTERIOR).count();
    let nloc = dofmap.n_local();
    let mut t = TripletBuilder::with_capacity(n_rows, n_rows, nloc * nloc * dofmap.mesh().num_cells());
    let mut values = vec![0.0; nloc];
    let mut grads = vec![[0.0; 2]; nloc];
    let mut local = vec![0.0; nloc * nloc];
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            for ((v, g), j) in values.iter_mut().zip(grads.iter_mut()).zip(q.tab.at(qi)) {
                *v = j.v;
                *g = map.gradient(j.g);
            }
            let a = cof2(&sigma_at(state, dofs, &values));
            let wq = w * map.measure();
            for i in 0..nloc {
                let gi = grads[i];
                for j in 0..nloc {
                    let gj = grads[j];
                    let agj = [a[0][0] * gj[0] + a[0][1] * gj[1], a[1][0] * gj[0] + a[1][1] * gj[1]];
                    local[i * nloc + j] += wq * (gi[0] * agj[0] + gi[1] * agj[1]);
                }
            }
        }
        for i in 0..nloc {
            let ri = rows[dofs[i]];
            if ri == INTERIOR {
                continue;
            }
            for j in 0..nloc {
                let rj = rows[dofs[j]];
                if rj != INTERIOR {
                    t.add(ri, rj, local[i * nloc + j]);
                }
            }
        }
    }
    t.finalize()
}

/// Operators that depend only on the mesh and space.
#[derive(Debug, Clone)]
pub struct SystemBlocks {
    /// Scalar mass matrix; `M` is four copies of it.
    pub mass: CsrMatrix,
    /// `B`, `4N × N`.
    pub hessian_op: CsrMatrix,
}

impl SystemBlocks {
    pub fn assemble(dofmap: &DofMap) -> Self {
        SystemBlocks { mass: assemble_scalar_mass(dofmap), hessian_op: assemble_hessian_op(dofmap) }
    }

    /// `M s + B u`.
    pub fn first_residual(&self, sigma: &[f64], u: &[f64]) -> Vec<f64> {
        let n = self.mass.nrows();
        let mut r = self.hessian_op.mul_vec(u);
        let mut tmp = vec![0.0; n];
        for c in 0..4 {
            self.mass.mul_vec_into(&sigma[c * n..(c + 1) * n], &mut tmp);
            for (ri, t) in r[c * n..(c + 1) * n].iter_mut().zip(&tmp) {
                *ri += t;
            }
        }
        r
    }
}

/// Strongly imposed Dirichlet data.
#[derive(Debug, Clone)]
pub struct Dirichlet {
    /// Boundary DOFs (`L_h` order).
    pub fixed: Vec<usize>,
    /// `g_h` at the fixed DOFs.
    pub values: Vec<f64>,
    /// Interior DOFs, the `u` unknowns.
    pub free: Vec<usize>,
    /// Position in `free`, or [`INTERIOR`] for fixed DOFs.
    pub free_index: Vec<usize>,
    /// Columns of `B` for the free DOFs (`4N × |free|`).
    pub hessian_free: CsrMatrix,
    /// `B_fixed g_h`: the boundary columns applied to the data.
    pub lift: Vec<f64>,
}

impl Dirichlet {
    /// Scatters free values and the boundary data into a full `u` vector.
    pub fn expand(&self, u_free: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.free_index.len()];
        for (&d, &v) in self.free.iter().zip(u_free) {
            u[d] = v;
        }
        for (&d, &v) in self.fixed.iter().zip(&self.values) {
            u[d] = v;
        }
        u
    }

    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| u[d]).collect()
    }
}

/// Eliminates the boundary `u` DOFs: fixes them to `g_h` and moves their
/// columns of `B` to the right-hand side.
pub fn apply_dirichlet(blocks: &SystemBlocks, dofmap: &DofMap, g_h: &[f64]) -> Result<Dirichlet> {
    let fixed = dofmap.boundary_dofs().to_vec();
    if g_h.len() != fixed.len() {
        return Err(Error::Internal(format!(
            "boundary data has {} values but the space has {} boundary DOFs",
            g_h.len(),
            fixed.len()
        )));
    }
    let free = dofmap.interior_dofs();
    let free_index = interior_numbering(dofmap);
    let col_map: Vec<Option<usize>> = free_index.iter().map(|&r| (r != INTERIOR).then_some(r)).collect();
    let rows: Vec<usize> = (0..blocks.hessian_op.nrows()).collect();
    let hessian_free = blocks.hessian_op.select(&rows, &col_map, free.len());
    let mut g_full = vec![0.0; dofmap.n_dofs()];
    for (&d, &v) in fixed.iter().zip(g_h) {
        g_full[d] = v;
    }
    let lift = blocks.hessian_op.mul_vec(&g_full);
    Ok(Dirichlet { fixed, values: g_h.to_vec(), free, free_index, hessian_free, lift })
}

/// `‖τ‖_{L²}` of a `Σ_h` coefficient vector, via the scalar mass matrix.
pub fn sigma_l2_norm(mass: &CsrMatrix, sigma: &[f64]) -> f64 {
    let n = mass.nrows();
    let mut s = 0.0;
    for c in 0..4 {
        let part = &sigma[c * n..(c + 1) * n];
        s += crate::math::dot(part, &mass.mul_vec(part));
    }
    sqrt(s.max(0.0))
}

/// `‖σ₁₂ − σ₂₁‖_{L²}`.
pub fn asymmetry_l2(mass: &CsrMatrix, sigma: &[f64]) -> f64 {
    let n = mass.nrows();
    let d: Vec<f64> = (0..n).map(|i| sigma[n + i] - sigma[2 * n + i]).collect();
    sqrt(crate::math::dot(&d, &mass.mul_vec(&d)).max(0.0))
}

/// Reconstructs `σ_h = M⁻¹(−B u)` given a factorization of the scalar mass.
pub fn reconstruct_hessian(blocks: &SystemBlocks, mass_lu: &crate::sparse::BandedLu, u: &[f64]) -> Vec<f64> {
    let n = blocks.mass.nrows();
    let rhs = blocks.hessian_op.mul_vec(u);
    let mut sigma = vec![0.0; 4 * n];
    for c in 0..4 {
        let neg: Vec<f64> = rhs[c * n..(c + 1) * n].iter().map(|v| -v).collect();
        sigma[c * n..(c + 1) * n].copy_from_slice(&mass_lu.solve(&neg));
    }
    sigma
}

/// Smallest `det σ_h` and smallest `σ₁₁` over the quadrature points of the
/// nonlinear rule (discrete convexity check).
pub fn min_det_and_diagonal(state: &State, dofmap: &DofMap) -> (f64, f64) {
    let q = TabulatedRule::new(dofmap, nonlinear_degree(dofmap)).expect("supported degree");
    let mut values = vec![0.0; dofmap.n_local()];
    let (mut det_min, mut s11_min) = (f64::INFINITY, f64::INFINITY);
    for cell in 0..dofmap.mesh().num_cells() {
        let dofs = dofmap.cell_dofs(cell);
        for qi in 0..q.rule.len() {
            for (v, j) in values.iter_mut().zip(q.tab.at(qi)) {
                *v = j.v;
            }
            let s = sigma_at(state, dofs, &values);
            det_min = det_min.min(det2(&s));
            s11_min = s11_min.min(s[0][0]);
        }
    }
    (det_min, s11_min)
}

#[cfg(test)]
mod tests;
