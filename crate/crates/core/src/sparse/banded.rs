use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Relative pivot size below which a matrix is declared singular.
const PIVOT_TOL: f64 = 1e-13;

/// Reverse Cuthill–McKee ordering of the symmetrized pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let degree = |v: usize| adj[v].len();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| -> usize {
        let mut queue = VecDeque::new();
        let first = out.len();
        visited[start] = true;
        queue.push_back(start);
        let mut last = start;
        while let Some(v) = queue.pop_front() {
            out.push(v);
            last = v;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        let _ = first;
        last
    };

    while order.len() < n {
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree(v), v)).unwrap();
        // a few sweeps towards a pseudo-peripheral start vertex
        let mut start = seed;
        for _ in 0..3 {
            let mut scratch = visited.clone();
            let mut tmp = Vec::new();
            let far = bfs(start, &mut scratch, &mut tmp);
            if far == start {
                break;
            }
            start = far;
        }
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// LU factorization with partial pivoting of a reordered band matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    /// Stored upper bandwidth (`ku + kl` after pivoting).
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "banded LU needs a square matrix");
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0, 0);
        for i in 0..n {
            for &j in a.row(i).0 {
                let (ni, nj) = (inv[i], inv[j]);
                if ni > nj {
                    kl = kl.max(ni - nj);
                } else {
                    ku = ku.max(nj - ni);
                }
            }
        }
        let ku_stored = ku + kl;
        let width = kl + ku_stored + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let ni = inv[i];
            for (&j, &v) in cols.iter().zip(vals) {
                data[ni * width + inv[j] + kl - ni] += v;
            }
        }
        let scale = a.max_abs();
        let mut lu = BandedLu { n, kl, ku: ku_stored, width, data, pivots: vec![0; n], perm };
        lu.eliminate(scale)?;
        Ok(lu)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self, scale: f64) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in j + 1..=last_row {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > PIVOT_TOL * scale) {
                return Err(Error::SingularMatrix { row: self.perm[j], pivot: best });
            }
            self.pivots[j] = p;
            let last_col = (j + ku).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    let (a, b) = (self.idx(j, c), self.idx(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(j, j)];
            for i in j + 1..=last_row {
                let ij = self.idx(i, j);
                let l = self.data[ij] / pivot;
                self.data[ij] = l;
                if l == 0.0 {
                    continue;
                }
                let (row_j, row_i) = (self.idx(j, j + 1), self.idx(i, j + 1));
                let len = last_col - j;
                for c in 0..len {
                    self.data[row_i + c] -= l * self.data[row_j + c];
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and (stored) upper bandwidth of the reordered factor.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..=(j + self.kl).min(n - 1) {
                    x[i] -= self.data[self.idx(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            let row = self.idx(j, j);
            for c in j + 1..=(j + self.ku).min(n - 1) {
                s -= self.data[row + c - j] * x[c];
            }
            x[j] = s / self.data[row];
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}
