use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const MIN_DEGREE: usize = 3;
pub const MAX_DEGREE: usize = 6;

/// Value, gradient and Hessian (`[xx, xy, yy]`) of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [f64; 3],
}

impl Jet {
    const ONE: Jet = Jet { v: 1.0, g: [0.0; 2], h: [0.0; 3] };

    fn affine(v: f64, g: [f64; 2]) -> Jet {
        Jet { v, g, h: [0.0; 3] }
    }

    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            g: [self.g[0] * o.v + self.v * o.g[0], self.g[1] * o.v + self.v * o.g[1]],
            h: [
                self.h[0] * o.v + 2.0 * self.g[0] * o.g[0] + self.v * o.h[0],
                self.h[1] * o.v + self.g[0] * o.g[1] + self.g[1] * o.g[0] + self.v * o.h[1],
                self.h[2] * o.v + 2.0 * self.g[1] * o.g[1] + self.v * o.h[2],
            ],
        }
    }
}

/// Degree-`k` Lagrange basis on the reference triangle with vertices
/// `(0,0), (1,0), (0,1)` and nodes on the principal lattice.
///
/// Node order: the three vertices, then `k - 1` nodes on each edge (local
/// edge `e` runs from vertex `e+1` to vertex `e+2`, mod 3), then interior
/// nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBasis {
    degree: usize,
    /// Lattice multi-indices `(i0, i1, i2)`, `i0 + i1 + i2 = k`, with respect
    /// to the barycentric coordinates `(1 - x - y, x, y)`.
    lattice: Vec<[usize; 3]>,
    nodes: Vec<[f64; 2]>,
}

impl ReferenceBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
            return Err(Error::UnsupportedDegree { degree, min: MIN_DEGREE, max: MAX_DEGREE });
        }
        let k = degree;
        let mut lattice = alloc::vec![[k, 0, 0], [0, k, 0], [0, 0, k]];
        for e in 0..3 {
            let (s, t) = ((e + 1) % 3, (e + 2) % 3);
            for j in 1..k {
                let mut idx = [0; 3];
                idx[s] = k - j;
                idx[t] = j;
                lattice.push(idx);
            }
        }
        for i2 in 1..k {
            for i1 in 1..k - i2 {
                lattice.push([k - i1 - i2, i1, i2]);
            }
        }
        let nodes = lattice.iter().map(|l| [l[1] as f64 / k as f64, l[2] as f64 / k as f64]).collect();
        Ok(ReferenceBasis { degree, lattice, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Node coordinates on the reference triangle.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Number of nodes strictly inside an edge.
    pub fn nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn interior_nodes(&self) -> usize {
        (self.degree - 1) * (self.degree - 2) / 2
    }

    /// Local indices of the nodes on local edge `e`, ordered from its start
    /// vertex to its end vertex.
    pub fn edge_nodes(&self, e: usize) -> Vec<usize> {
        let per = self.nodes_per_edge();
        let mut out = Vec::with_capacity(per + 2);
        out.push((e + 1) % 3);
        out.extend(3 + e * per..3 + (e + 1) * per);
        out.push((e + 2) % 3);
        out
    }

    /// Jets of every basis function at reference point `p`.
    pub fn jets(&self, p: [f64; 2]) -> Vec<Jet> {
        let k = self.degree as f64;
        let bary = [
            Jet::affine(1.0 - p[0] - p[1], [-1.0, -1.0]),
            Jet::affine(p[0], [1.0, 0.0]),
            Jet::affine(p[1], [0.0, 1.0]),
        ];
        self.lattice
            .iter()
            .map(|idx| {
                let mut phi = Jet::ONE;
                for (c, &n) in idx.iter().enumerate() {
                    for m in 0..n {
                        let denom = (n - m) as f64;
                        let lam = bary[c];
                        let factor = Jet::affine((k * lam.v - m as f64) / denom, [k * lam.g[0] / denom, k * lam.g[1] / denom]);
                        phi = phi.mul(factor);
                    }
                }
                phi
            })
            .collect()
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<f64> {
        self.jets(p).into_iter().map(|j| j.v).collect()
    }

    pub fn gradients(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        self.jets(p).into_iter().map(|j| j.g).collect()
    }

    pub fn hessians(&self, p: [f64; 2]) -> Vec<[f64; 3]> {
        self.jets(p).into_iter().map(|j| j.h).collect()
    }

    /// Jets of all basis functions at a list of points, point-major.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let mut jets = Vec::with_capacity(points.len() * self.len());
        for &p in points {
            jets.extend(self.jets(p));
        }
        Tabulation { n_basis: self.len(), jets }
    }
}

/// Basis jets at a fixed set of reference points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    n_basis: usize,
    jets: Vec<Jet>,
}

impl Tabulation {
    pub fn at(&self, q: usize) -> &[Jet] {
        &self.jets[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn n_points(&self) -> usize {
        self.jets.len() / self.n_basis
    }
}

pub fn reference_basis(k: usize) -> Result<ReferenceBasis> {
    ReferenceBasis::new(k)
}
