use alloc::format;
use alloc::vec::Vec;

use super::Mesh;
use crate::error::{Error, Result};
use crate::math::{sq, sqrt};

/// Per-cell diameter and inradius, and the derived regularity measures.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    /// Cell diameter (longest edge).
    pub h: Vec<f64>,
    /// Inradius `2·area / perimeter`.
    pub rho: Vec<f64>,
    /// `h_K / ρ_K`; at least `2√3` for any triangle.
    pub ratio: Vec<f64>,
    pub h_max: f64,
    pub h_min: f64,
    /// `h_max / h_min`; 1 on a mesh of congruent cells.
    pub quasi_uniformity: f64,
}

impl ShapeReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratio.iter().copied().fold(0.0, f64::max)
    }
}

pub fn shape_metrics(mesh: &Mesh) -> Result<ShapeReport> {
    let n = mesh.num_cells();
    let (mut h, mut rho, mut ratio) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let p = mesh.cell_points(k);
        let len = |a: usize, b: usize| sqrt(sq(p[a][0] - p[b][0]) + sq(p[a][1] - p[b][1]));
        let lens = [len(1, 2), len(2, 0), len(0, 1)];
        let area = mesh.cell_area(k);
        if !(area > 0.0) {
            return Err(Error::InvalidMesh(format!("cell {k} is degenerate")));
        }
        let hk = lens.iter().copied().fold(0.0, f64::max);
        let rk = 2.0 * area / (lens[0] + lens[1] + lens[2]);
        h.push(hk);
        rho.push(rk);
        ratio.push(hk / rk);
    }
    let h_max = h.iter().copied().fold(0.0, f64::max);
    let h_min = h.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ShapeReport { h, rho, ratio, h_max, h_min, quasi_uniformity: h_max / h_min })
}
