//! Conforming triangulations of polygonal domains.

mod refine;
mod shape;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sq;

pub use shape::{shape_metrics, ShapeReport};

/// Sentinel for "no neighbouring cell" in [`Mesh::edge_cells`].
pub const NO_CELL: usize = usize::MAX;

/// A boundary edge with its marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// Index into [`Mesh::edges`].
    pub edge: usize,
    pub marker: i32,
}

/// Conforming triangle mesh.
///
/// Local edge `i` of a cell is the edge opposite its local vertex `i`.
/// The refinement edge of a cell is the edge opposite its newest vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_cells: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    refinement_edge: Vec<u8>,
}

/// Sorted vertex pair identifying an edge.
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Vertex indices `(start, end)` of local edge `e` of a cell.
pub fn local_edge(cell: &[usize; 3], e: usize) -> (usize, usize) {
    (cell[(e + 1) % 3], cell[(e + 2) % 3])
}

fn signed_area(p: &[[f64; 2]], c: &[usize; 3]) -> f64 {
    let [a, b, d] = [p[c[0]], p[c[1]], p[c[2]]];
    0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
}

fn longest_local_edge(p: &[[f64; 2]], c: &[usize; 3]) -> u8 {
    let mut best = 0;
    let mut best_len = -1.0;
    for e in 0..3 {
        let (a, b) = local_edge(c, e);
        let len = sq(p[a][0] - p[b][0]) + sq(p[a][1] - p[b][1]);
        if len > best_len * (1.0 + 1e-12) {
            best = e;
            best_len = len;
        }
    }
    best as u8
}

impl Mesh {
    /// Builds a mesh with every boundary edge carrying marker 1. Clockwise
    /// cells are reoriented; the refinement edge of every cell is its
    /// longest edge.
    pub fn new(vertices: Vec<[f64; 2]>, cells: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, cells, None, None)
    }

    /// Like [`Mesh::new`], with explicit boundary markers keyed by edge
    /// endpoints. The marked edges must be exactly the boundary edges.
    pub fn with_markers(
        vertices: Vec<[f64; 2]>,
        cells: Vec<[usize; 3]>,
        markers: &[([usize; 2], i32)],
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &([a, b], m) in markers {
            if map.insert(edge_key(a, b), m).is_some() {
                return Err(Error::InvalidMesh(format!("boundary edge ({a}, {b}) listed twice")));
            }
        }
        Self::build(vertices, cells, Some(map), None)
    }

    pub(crate) fn build(
        vertices: Vec<[f64; 2]>,
        mut cells: Vec<[usize; 3]>,
        markers: Option<BTreeMap<(usize, usize), i32>>,
        refinement_edge: Option<Vec<u8>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        for (k, c) in cells.iter_mut().enumerate() {
            if c.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("cell {k} references a vertex out of range")));
            }
            let area = signed_area(&vertices, c);
            if area == 0.0 || !area.is_finite() {
                return Err(Error::InvalidMesh(format!("cell {k} has zero area")));
            }
            if area < 0.0 {
                c.swap(1, 2);
            }
        }

        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<[usize; 2]> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (k, c) in cells.iter().enumerate() {
            let mut ce = [0; 3];
            for (e, slot) in ce.iter_mut().enumerate() {
                let (a, b) = local_edge(c, e);
                let key = edge_key(a, b);
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push([NO_CELL, NO_CELL]);
                    edges.len() - 1
                });
                let adj = &mut edge_cells[id];
                if adj[0] == NO_CELL {
                    adj[0] = k;
                } else if adj[1] == NO_CELL {
                    adj[1] = k;
                } else {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) shared by more than two cells",
                        key.0, key.1
                    )));
                }
                *slot = id;
            }
            cell_edges.push(ce);
        }

        let mut boundary = Vec::new();
        let mut degree = alloc::vec![0u32; nv];
        for (id, adj) in edge_cells.iter().enumerate() {
            if adj[1] != NO_CELL {
                continue;
            }
            let key = (edges[id][0], edges[id][1]);
            let marker = match &markers {
                Some(m) => *m.get(&key).ok_or_else(|| {
                    Error::InvalidMesh(format!("boundary edge ({}, {}) has no marker", key.0, key.1))
                })?,
                None => 1,
            };
            degree[key.0] += 1;
            degree[key.1] += 1;
            boundary.push(BoundaryEdge { edge: id, marker });
        }
        if let Some(m) = &markers {
            if m.len() != boundary.len() {
                return Err(Error::InvalidMesh(format!(
                    "{} boundary markers given but the mesh has {} boundary edges",
                    m.len(),
                    boundary.len()
                )));
            }
        }
        if let Some(v) = degree.iter().position(|d| d % 2 == 1) {
            return Err(Error::InvalidMesh(format!("boundary is not closed at vertex {v}")));
        }

        let refinement_edge = match refinement_edge {
            Some(r) => {
                if r.len() != cells.len() || r.iter().any(|&e| e > 2) {
                    return Err(Error::Internal("bad refinement edge data".into()));
                }
                r
            }
            None => cells.iter().map(|c| longest_local_edge(&vertices, c)).collect(),
        };

        Ok(Mesh { vertices, cells, edges, edge_cells, cell_edges, boundary, refinement_edge })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    /// Edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Incident cells of each edge; the second slot is [`NO_CELL`] on the boundary.
    pub fn edge_cells(&self) -> &[[usize; 2]] {
        &self.edge_cells
    }

    /// Global edge index of each local edge.
    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Local index (0..3) of the refinement edge of each cell.
    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_cells[edge][1] == NO_CELL
    }

    pub fn cell_points(&self, cell: usize) -> [[f64; 2]; 3] {
        let c = &self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(&self.vertices, &self.cells[cell])
    }

    pub fn cell_centroid(&self, cell: usize) -> [f64; 2] {
        let p = self.cell_points(cell);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|k| self.cell_area(k)).sum()
    }

    /// Boundary edges of `cell` as `(local edge index, marker)`.
    pub fn cell_boundary_edges(&self, cell: usize) -> impl Iterator<Item = (usize, i32)> + '_ {
        self.cell_edges[cell].iter().enumerate().filter_map(move |(e, &id)| {
            if self.is_boundary_edge(id) {
                let marker = self.boundary.iter().find(|b| b.edge == id).map_or(1, |b| b.marker);
                Some((e, marker))
            } else {
                None
            }
        })
    }

    /// Whether every interior edge has two incident cells and every edge at
    /// least one, i.e. there are no hanging nodes.
    pub fn is_conforming(&self) -> bool {
        // a hanging node sits inside an edge that only one cell sees
        let mut on_edge = false;
        for b in &self.boundary {
            let [a, c] = self.edges[b.edge];
            let (pa, pc) = (self.vertices[a], self.vertices[c]);
            for (v, p) in self.vertices.iter().enumerate() {
                if v == a || v == c {
                    continue;
                }
                let cross = (pc[0] - pa[0]) * (p[1] - pa[1]) - (pc[1] - pa[1]) * (p[0] - pa[0]);
                let t = ((p[0] - pa[0]) * (pc[0] - pa[0]) + (p[1] - pa[1]) * (pc[1] - pa[1]))
                    / (sq(pc[0] - pa[0]) + sq(pc[1] - pa[1]));
                let len2 = sq(pc[0] - pa[0]) + sq(pc[1] - pa[1]);
                if cross.abs() <= 1e-12 * len2 && t > 1e-12 && t < 1.0 - 1e-12 {
                    on_edge = true;
                }
            }
        }
        !on_edge && self.edge_cells.iter().all(|adj| adj[0] != NO_CELL)
    }
}

/// Structured mesh of the unit square with `n × n` squares, each split into
/// two right triangles along the diagonal from lower-left to upper-right.
/// Boundary markers: 1 bottom, 2 right, 3 top, 4 left.
pub fn unit_square_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "unit_square_mesh needs n >= 1");
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    let mut refinement_edge = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            cells.push([v00, v10, v11]);
            refinement_edge.push(1);
            cells.push([v00, v11, v01]);
            refinement_edge.push(2);
        }
    }
    let mut markers = BTreeMap::new();
    for i in 0..n {
        markers.insert(edge_key(id(i, 0), id(i + 1, 0)), 1);
        markers.insert(edge_key(id(n, i), id(n, i + 1)), 2);
        markers.insert(edge_key(id(i, n), id(i + 1, n)), 3);
        markers.insert(edge_key(id(0, i), id(0, i + 1)), 4);
    }
    Mesh::build(vertices, cells, Some(markers), Some(refinement_edge))
        .expect("structured mesh is valid")
}

/// Boundary markers keyed by sorted endpoints.
pub(crate) fn marker_map(mesh: &Mesh) -> BTreeMap<(usize, usize), i32> {
    mesh.boundary
        .iter()
        .map(|b| {
            let [a, c] = mesh.edges[b.edge];
            ((a, c), b.marker)
        })
        .collect()
}

pub use refine::{bisect, bisect_with_parents, refine_uniform, refine_uniform_with_parents};
