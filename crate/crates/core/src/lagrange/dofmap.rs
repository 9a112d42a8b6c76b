use alloc::vec;
use alloc::vec::Vec;

use super::basis::ReferenceBasis;
use super::geometry::CellMap;
use crate::error::Result;
use crate::mesh::Mesh;

/// Marks a DOF that is not on the boundary in [`DofMap::boundary_index`].
pub const INTERIOR: usize = usize::MAX;

/// Global numbering of the continuous degree-`k` Lagrange space `V_h`.
///
/// Global order: vertex DOFs, then `k - 1` DOFs per edge (running from the
/// lower to the higher vertex index), then interior DOFs cell by cell.
///
/// `Σ_h` is stored as four stacked copies of `V_h` (component-major,
/// `σ₁₁, σ₁₂, σ₂₁, σ₂₂`); `L_h` is indexed by the boundary DOFs of `V_h`.
#[derive(Debug, Clone)]
pub struct DofMap {
    mesh: Mesh,
    basis: ReferenceBasis,
    n_dofs: usize,
    cell_dofs: Vec<usize>,
    points: Vec<[f64; 2]>,
    boundary: Vec<usize>,
    boundary_index: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, degree: usize) -> Result<Self> {
        let basis = ReferenceBasis::new(degree)?;
        let k = degree;
        let (nv, ne, nc) = (mesh.num_vertices(), mesh.num_edges(), mesh.num_cells());
        let per_edge = k - 1;
        let per_cell = basis.interior_nodes();
        let n_dofs = nv + per_edge * ne + per_cell * nc;
        let nloc = basis.len();

        let mut cell_dofs = Vec::with_capacity(nloc * nc);
        let mut points = vec![[f64::NAN; 2]; n_dofs];
        for (c, cell) in mesh.cells().iter().enumerate() {
            let start = cell_dofs.len();
            cell_dofs.extend_from_slice(cell);
            for e in 0..3 {
                let edge = mesh.cell_edges()[c][e];
                let forward = cell[(e + 1) % 3] < cell[(e + 2) % 3];
                for j in 0..per_edge {
                    let t = if forward { j } else { per_edge - 1 - j };
                    cell_dofs.push(nv + edge * per_edge + t);
                }
            }
            let base = nv + per_edge * ne + per_cell * c;
            cell_dofs.extend(base..base + per_cell);

            let map = CellMap::new(&mesh.cell_points(c));
            for (i, &node) in basis.nodes().iter().enumerate() {
                points[cell_dofs[start + i]] = map.to_physical(node);
            }
        }

        let mut on_boundary = vec![false; n_dofs];
        for b in mesh.boundary_edges() {
            let [a, c] = mesh.edges()[b.edge];
            on_boundary[a] = true;
            on_boundary[c] = true;
            for t in 0..per_edge {
                on_boundary[nv + b.edge * per_edge + t] = true;
            }
        }
        let boundary: Vec<usize> = (0..n_dofs).filter(|&i| on_boundary[i]).collect();
        let mut boundary_index = vec![INTERIOR; n_dofs];
        for (j, &i) in boundary.iter().enumerate() {
            boundary_index[i] = j;
        }

        Ok(DofMap { mesh: mesh.clone(), basis, n_dofs, cell_dofs, points, boundary, boundary_index })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn basis(&self) -> &ReferenceBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    /// `dim V_h`.
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// `dim Σ_h = 4 dim V_h`.
    pub fn n_sigma_dofs(&self) -> usize {
        4 * self.n_dofs
    }

    /// `dim L_h`, the number of boundary DOFs of `V_h`.
    pub fn n_trace_dofs(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    /// Global DOFs of `cell` in local basis order.
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let n = self.n_local();
        &self.cell_dofs[cell * n..(cell + 1) * n]
    }

    /// Physical position of every DOF.
    pub fn dof_points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Boundary DOFs in ascending order; position `j` is `L_h` DOF `j`.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary
    }

    /// Position in [`DofMap::boundary_dofs`], or [`INTERIOR`].
    pub fn boundary_index(&self, dof: usize) -> usize {
        self.boundary_index[dof]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary_index[dof] != INTERIOR
    }

    /// Non-boundary DOFs in ascending order.
    pub fn interior_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn cell_map(&self, cell: usize) -> CellMap {
        CellMap::new(&self.mesh.cell_points(cell))
    }
}

pub fn build_dofmap(mesh: &Mesh, degree: usize) -> Result<DofMap> {
    DofMap::new(mesh, degree)
}
