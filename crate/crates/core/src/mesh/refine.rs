//! Red (uniform) refinement and newest-vertex bisection.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{edge_key, local_edge, marker_map, Mesh};
use crate::error::{Error, Result};

fn midpoint(p: &[[f64; 2]], a: usize, b: usize) -> [f64; 2] {
    [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])]
}

fn split_markers(
    mesh: &Mesh,
    midpoints: &BTreeMap<(usize, usize), usize>,
) -> BTreeMap<(usize, usize), i32> {
    let mut markers = BTreeMap::new();
    for (key, m) in marker_map(mesh) {
        match midpoints.get(&key) {
            Some(&mid) => {
                markers.insert(edge_key(key.0, mid), m);
                markers.insert(edge_key(mid, key.1), m);
            }
            None => {
                markers.insert(key, m);
            }
        }
    }
    markers
}

/// Splits every cell into four similar children through its edge midpoints.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    refine_uniform_with_parents(mesh).0
}

/// [`refine_uniform`], also returning the parent cell of every new cell.
pub fn refine_uniform_with_parents(mesh: &Mesh) -> (Mesh, Vec<usize>) {
    let mut vertices = mesh.vertices().to_vec();
    let nv = vertices.len();
    let mut mids = BTreeMap::new();
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        vertices.push(midpoint(mesh.vertices(), a, b));
        mids.insert((a, b), nv + e);
    }
    let nc = mesh.num_cells();
    let mut cells = Vec::with_capacity(4 * nc);
    let mut refs = Vec::with_capacity(4 * nc);
    let mut parents = Vec::with_capacity(4 * nc);
    for (k, c) in mesh.cells().iter().enumerate() {
        let m: [usize; 3] = core::array::from_fn(|e| nv + mesh.cell_edges()[k][e]);
        let r = mesh.refinement_edges()[k];
        // corner children are scaled copies of the parent with the same
        // vertex correspondence; the middle child is the parent rotated by π
        cells.extend_from_slice(&[[c[0], m[2], m[1]], [m[2], c[1], m[0]], [m[1], m[0], c[2]], [m[2], m[0], m[1]]]);
        refs.extend_from_slice(&[r, r, r, (r + 1) % 3]);
        parents.extend_from_slice(&[k; 4]);
    }
    let markers = split_markers(mesh, &mids);
    let refined = Mesh::build(vertices, cells, Some(markers), Some(refs))
        .expect("red refinement of a valid mesh is valid");
    (refined, parents)
}

/// Newest-vertex bisection of the marked cells plus the closure needed to
/// keep the mesh conforming.
pub fn bisect(mesh: &Mesh, marked: &[usize]) -> Result<Mesh> {
    bisect_with_parents(mesh, marked).map(|(m, _)| m)
}

/// [`bisect`], also returning the parent cell of every new cell.
pub fn bisect_with_parents(mesh: &Mesh, marked: &[usize]) -> Result<(Mesh, Vec<usize>)> {
    let nc = mesh.num_cells();
    if let Some(&bad) = marked.iter().find(|&&k| k >= nc) {
        return Err(Error::Parameter(format!("marked cell {bad} out of range (mesh has {nc} cells)")));
    }
    if marked.is_empty() {
        return Ok((mesh.clone(), (0..nc).collect()));
    }

    let ref_edge = |k: usize| mesh.cell_edges()[k][mesh.refinement_edges()[k] as usize];
    let mut split = vec![false; mesh.num_edges()];
    for &k in marked {
        split[ref_edge(k)] = true;
    }
    // closure: a cell with any split edge must split its refinement edge
    let mut generations = 0;
    loop {
        let mut changed = false;
        for k in 0..nc {
            let r = ref_edge(k);
            if !split[r] && mesh.cell_edges()[k].iter().any(|&e| split[e]) {
                split[r] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        generations += 1;
        if generations > 4 * nc {
            return Err(Error::Internal(format!(
                "bisection closure exceeded {} generations; refinement edge data is corrupt",
                4 * nc
            )));
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut mids = BTreeMap::new();
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        if split[e] {
            mids.insert((a, b), vertices.len());
            vertices.push(midpoint(mesh.vertices(), a, b));
        }
    }

    let mut cells = Vec::with_capacity(nc + 2 * mids.len());
    let mut refs = Vec::with_capacity(cells.capacity());
    let mut parents = Vec::with_capacity(cells.capacity());
    let mut stack = Vec::new();
    for k in 0..nc {
        stack.push((mesh.cells()[k], mesh.refinement_edges()[k] as usize));
        while let Some((c, r)) = stack.pop() {
            let (e0, e1) = local_edge(&c, r);
            match mids.get(&edge_key(e0, e1)) {
                Some(&m) => {
                    let peak = c[r];
                    // pushed in reverse so children come out in order
                    stack.push(([peak, m, e1], 1));
                    stack.push(([peak, e0, m], 2));
                }
                None => {
                    cells.push(c);
                    refs.push(r as u8);
                    parents.push(k);
                }
            }
        }
    }

    let markers = split_markers(mesh, &mids);
    let refined = Mesh::build(vertices, cells, Some(markers), Some(refs))?;
    Ok((refined, parents))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{shape_metrics, unit_square_mesh};

    #[test]
    fn uniform_refinement_quadruples_and_halves() {
        let m = unit_square_mesh(1);
        let r = refine_uniform(&m);
        assert_eq!(r.num_cells(), 8);
        assert!(r.is_conforming());
        let (s0, s1) = (shape_metrics(&m).unwrap(), shape_metrics(&r).unwrap());
        assert_eq!(s1.h_max, s0.h_max / 2.0);
        for k in 0..r.num_cells() {
            assert!((s1.ratio[k] - s0.ratio[k / 4]).abs() < 1e-12);
        }
        assert_eq!(r.boundary_edges().len(), 8);
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = unit_square_mesh(3);
        assert_eq!(bisect(&m, &[]).unwrap(), m);
    }

    #[test]
    fn single_mark_on_two_cell_square() {
        let m = bisect(&unit_square_mesh(1), &[0]).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.num_vertices(), 5);
        assert!(m.is_conforming());
        assert_eq!(m.vertices()[4], [0.5, 0.5]);
    }

    #[test]
    fn out_of_range_mark() {
        assert!(matches!(bisect(&unit_square_mesh(1), &[2]), Err(Error::Parameter(_))));
    }

    #[test]
    fn corrupt_refinement_data_still_terminates() {
        // arbitrary refinement edges are incompatible but closure still ends
        let m = unit_square_mesh(2);
        let refs = vec![0u8; m.num_cells()];
        let m = Mesh::build(m.vertices().to_vec(), m.cells().to_vec(), None, Some(refs)).unwrap();
        let r = bisect(&m, &[3]).unwrap();
        assert!(r.is_conforming());
        assert!((r.total_area() - 1.0).abs() < 1e-14);
    }
}
