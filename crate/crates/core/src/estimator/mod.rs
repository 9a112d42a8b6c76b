//! Residual a posteriori estimator, data oscillation and Dörfler marking.
//!
//! Per cell `K`, with `f_h = I_h f`, `g_h = I_h g` and `A_h` a computable
//! stand-in for the cofactor of the exact Hessian:
//!
//! ```text
//! Θ_K² = ‖f_h − A_h:D²u_h‖²_K + ‖σ_h − D²u_h‖²_K
//!      + ‖f_h − det σ_h − A_h:D²u_h‖²_K + Σ_{E ⊂ ∂K ∩ ∂Ω} ‖g_h − λ_h‖²_E
//! ζ_K² = ‖f − f_h‖²_K + Σ_{E ⊂ ∂K ∩ ∂Ω} ‖g − g_h‖²_E
//! ```

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::lagrange::{combine, interpolate, DofMap, State, Target, Tabulation};
use crate::math::{cof2, det2, frobenius, sq, sqrt};
use crate::problems::{trace_to_volume, ErrorReport, Problem};
use crate::quadrature::{edge_rule, triangle_rule, EdgeRule, TriangleRule, MAX_TRIANGLE_DEGREE};

/// Which discrete field supplies the cofactor matrix `A_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CofactorSource {
    /// `A_h = cof(D²u_h)`, elementwise.
    #[default]
    Hessian,
    /// `A_h = cof(σ_h)`.
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimatorOptions {
    pub cofactor_source: CofactorSource,
    /// Extra degrees added to the `3k` quadrature rule.
    pub quadrature_bump: usize,
}

/// The four squared terms of `Θ_K²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellIndicator {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub term4: f64,
}

impl CellIndicator {
    pub fn theta_sq(&self) -> f64 {
        self.term1 + self.term2 + self.term3 + self.term4
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndicatorReport {
    pub cells: Vec<CellIndicator>,
}

impl IndicatorReport {
    /// `Θ_K²` per cell.
    pub fn local_squares(&self) -> Vec<f64> {
        self.cells.iter().map(CellIndicator::theta_sq).collect()
    }

    pub fn theta_sq(&self) -> f64 {
        self.cells.iter().map(CellIndicator::theta_sq).sum()
    }

    pub fn theta(&self) -> f64 {
        sqrt(self.theta_sq())
    }

    /// Global sums of the four terms.
    pub fn totals(&self) -> CellIndicator {
        self.cells.iter().fold(CellIndicator::default(), |acc, c| CellIndicator {
            term1: acc.term1 + c.term1,
            term2: acc.term2 + c.term2,
            term3: acc.term3 + c.term3,
            term4: acc.term4 + c.term4,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// `ζ_K²` per cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OscillationReport {
    pub cells: Vec<f64>,
}

impl OscillationReport {
    pub fn zeta_sq(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn zeta(&self) -> f64 {
        sqrt(self.zeta_sq())
    }
}

fn estimator_degree(dofmap: &DofMap, bump: usize) -> usize {
    (3 * dofmap.degree() + bump).min(MAX_TRIANGLE_DEGREE)
}

/// Quadrature points on the boundary edges of one cell: reference point,
/// physical point, weight (edge length included) and outward unit normal.
fn boundary_points(dofmap: &DofMap, cell: usize, rule: &EdgeRule) -> Vec<([f64; 2], [f64; 2], f64, [f64; 2])> {
    const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let map = dofmap.cell_map(cell);
    let mut out = Vec::new();
    for (le, _) in dofmap.mesh().cell_boundary_edges(cell) {
        let (s, e) = (CORNERS[(le + 1) % 3], CORNERS[(le + 2) % 3]);
        let (pa, pb) = (map.to_physical(s), map.to_physical(e));
        let len = sqrt(sq(pb[0] - pa[0]) + sq(pb[1] - pa[1]));
        // cells are counterclockwise
        let normal = [(pb[1] - pa[1]) / len, (pa[0] - pb[0]) / len];
        for (t, w) in rule.iter() {
            let xi = [s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])];
            out.push((xi, map.to_physical(xi), w * len, normal));
        }
    }
    out
}

/// Precomputed data for evaluating indicators cell by cell. Cells are
/// independent, so callers may split the cell range across threads.
pub struct IndicatorEvaluator<'a> {
    state: &'a State,
    dofmap: &'a DofMap,
    problem: &'a Problem,
    opts: EstimatorOptions,
    f_h: Vec<f64>,
    g_h: Vec<f64>,
    lambda: Vec<f64>,
    rule: TriangleRule,
    tab: Tabulation,
    edges: EdgeRule,
}

impl<'a> IndicatorEvaluator<'a> {
    pub fn new(state: &'a State, dofmap: &'a DofMap, problem: &'a Problem, opts: EstimatorOptions) -> Result<Self> {
        if !state.matches(dofmap) {
            return Err(Error::Internal("state does not match the finite element space".to_string()));
        }
        let f_h = interpolate(&*problem.f, dofmap, Target::Volume)?;
        let g_h = trace_to_volume(dofmap, &interpolate(&*problem.g, dofmap, Target::Trace)?);
        let lambda = trace_to_volume(dofmap, &state.lambda);
        let degree = estimator_degree(dofmap, opts.quadrature_bump);
        let rule = triangle_rule(degree)?;
        let tab = dofmap.basis().tabulate(&rule.points);
        Ok(IndicatorEvaluator { state, dofmap, problem, opts, f_h, g_h, lambda, rule, tab, edges: edge_rule(degree) })
    }

    pub fn num_cells(&self) -> usize {
        self.dofmap.mesh().num_cells()
    }

    /// The four terms of `Θ_K²`.
    pub fn indicator(&self, cell: usize) -> CellIndicator {
        let d = self.dofmap;
        let n = d.n_dofs();
        let map = d.cell_map(cell);
        let dofs = d.cell_dofs(cell);
        let mut out = CellIndicator::default();
        for (q, &w) in self.rule.weights.iter().enumerate() {
            let wq = w * map.measure();
            let jets = self.tab.at(q);
            let hess = combine(jets, dofs.iter().map(|&i| self.state.u[i]), &map).hess;
            let fh = combine(jets, dofs.iter().map(|&i| self.f_h[i]), &map).value;
            let mut sigma = [[0.0; 2]; 2];
            for (c, s) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                sigma[s.0][s.1] = jets.iter().zip(dofs).map(|(j, &i)| j.v * self.state.sigma[c * n + i]).sum();
            }
            let a = match self.opts.cofactor_source {
                CofactorSource::Hessian => cof2(&hess),
                CofactorSource::Sigma => cof2(&sigma),
            };
            let a_d2u = frobenius(&a, &hess);
            out.term1 += wq * sq(fh - a_d2u);
            out.term2 += wq
                * (sq(sigma[0][0] - hess[0][0])
                    + sq(sigma[0][1] - hess[0][1])
                    + sq(sigma[1][0] - hess[1][0])
                    + sq(sigma[1][1] - hess[1][1]));
            out.term3 += wq * sq(fh - det2(&sigma) - a_d2u);
        }
        for (xi, _, w, _) in boundary_points(d, cell, &self.edges) {
            let jets = d.basis().jets(xi);
            let diff: f64 = jets.iter().zip(dofs).map(|(j, &i)| j.v * (self.g_h[i] - self.lambda[i])).sum();
            out.term4 += w * sq(diff);
        }
        out
    }

    /// `ζ_K²`.
    pub fn oscillation(&self, cell: usize) -> f64 {
        let d = self.dofmap;
        let map = d.cell_map(cell);
        let dofs = d.cell_dofs(cell);
        let mut z = 0.0;
        for (q, &w) in self.rule.weights.iter().enumerate() {
            let x = map.to_physical(self.rule.points[q]);
            let fh: f64 = self.tab.at(q).iter().zip(dofs).map(|(j, &i)| j.v * self.f_h[i]).sum();
            z += w * map.measure() * sq((self.problem.f)(x) - fh);
        }
        for (xi, x, w, _) in boundary_points(d, cell, &self.edges) {
            let jets = d.basis().jets(xi);
            let gh: f64 = jets.iter().zip(dofs).map(|(j, &i)| j.v * self.g_h[i]).sum();
            z += w * sq((self.problem.g)(x) - gh);
        }
        z
    }
}

pub fn local_indicators(state: &State, dofmap: &DofMap, problem: &Problem, opts: EstimatorOptions) -> Result<IndicatorReport> {
    let ev = IndicatorEvaluator::new(state, dofmap, problem, opts)?;
    Ok(IndicatorReport { cells: (0..ev.num_cells()).map(|c| ev.indicator(c)).collect() })
}

/// Data oscillation against the exact `f` and `g`. Depends on the data and
/// the space only.
pub fn data_oscillation(problem: &Problem, dofmap: &DofMap, opts: EstimatorOptions) -> Result<OscillationReport> {
    let state = State::zeros(dofmap);
    let ev = IndicatorEvaluator::new(&state, dofmap, problem, opts)?;
    Ok(OscillationReport { cells: (0..ev.num_cells()).map(|c| ev.oscillation(c)).collect() })
}

/// Error norms below this are treated as zero by [`effectivity`].
pub const EFFECTIVITY_FLOOR: f64 = 1e-10;

/// `Θ / (‖e_σ‖²_1 + ‖e_u‖²_{2,h} + ‖e_λ‖²_{0,∂Ω})^{1/2}`.
pub fn effectivity(report: &IndicatorReport, errors: &ErrorReport) -> Result<f64> {
    let e = errors.combined_norm();
    if !(e > EFFECTIVITY_FLOOR) {
        return Err(Error::UndefinedEffectivity { error_norm: e });
    }
    Ok(report.theta() / e)
}

/// Dörfler marking on squared local indicators: the shortest prefix of the
/// cells sorted by decreasing indicator (ties by ascending index) whose sum
/// reaches `theta² Σ η_K²`.
pub fn mark_dorfler_squares(local_sq: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Parameter(format!("Dörfler parameter theta must lie in (0, 1], got {theta}")));
    }
    if local_sq.is_empty() {
        return Err(Error::Parameter("cannot mark an empty indicator set".to_string()));
    }
    if let Some(bad) = local_sq.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Data(format!("indicator of cell {bad} is {}", local_sq[bad])));
    }
    let mut order: Vec<usize> = (0..local_sq.len()).collect();
    order.sort_by(|&a, &b| local_sq[b].partial_cmp(&local_sq[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    // Summed in marking order, so theta = 1 selects exactly the nonzero cells.
    let total: f64 = order.iter().map(|&c| local_sq[c]).sum();
    let target = theta * theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &c in &order {
        if acc >= target {
            break;
        }
        acc += local_sq[c];
        marked.push(c);
    }
    Ok(marked)
}

pub fn mark_dorfler(report: &IndicatorReport, theta: f64) -> Result<Vec<usize>> {
    mark_dorfler_squares(&report.local_squares(), theta)
}

/// Residual functional at a discrete test triple `W = (τ, v, μ)`:
///
/// ```text
/// R(W) = (f − det σ_h, v) − (σ_h, τ) − (∇·τ, Du_h) + ⟨Du_h, τ n⟩ + ⟨g_h − λ_h, μ⟩
/// ```
///
/// evaluated by quadrature directly from the fields. `v` must vanish on the
/// boundary.
pub fn residual_functional(state: &State, dofmap: &DofMap, problem: &Problem, test: &State) -> Result<f64> {
    if !state.matches(dofmap) || !test.matches(dofmap) {
        return Err(Error::Internal("state does not match the finite element space".to_string()));
    }
    if let Some(&d) = dofmap.boundary_dofs().iter().find(|&&d| test.u[d] != 0.0) {
        return Err(Error::Parameter(format!("test function v is nonzero at boundary DOF {d}")));
    }
    let k = dofmap.degree();
    let n = dofmap.n_dofs();
    let rule = triangle_rule((3 * k).min(MAX_TRIANGLE_DEGREE))?;
    let tab = dofmap.basis().tabulate(&rule.points);
    let mut total = 0.0;
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        for (q, &w) in rule.weights.iter().enumerate() {
            let wq = w * map.measure();
            let jets = tab.at(q);
            let x = map.to_physical(rule.points[q]);
            let uh = combine(jets, dofs.iter().map(|&d| state.u[d]), &map);
            let v = combine(jets, dofs.iter().map(|&d| test.u[d]), &map).value;
            let mut sigma = [[0.0; 2]; 2];
            let mut integrand = 0.0;
            for c in 0..4 {
                let (a, b) = (c / 2, c % 2);
                sigma[a][b] = combine(jets, dofs.iter().map(|&d| state.sigma[c * n + d]), &map).value;
                let tau = combine(jets, dofs.iter().map(|&d| test.sigma[c * n + d]), &map);
                // (∇·τ)_a = ∂_b τ_ab
                integrand -= sigma[a][b] * tau.value + tau.grad[b] * uh.grad[a];
            }
            integrand += ((problem.f)(x) - det2(&sigma)) * v;
            total += wq * integrand;
        }
    }
    let g_h = trace_to_volume(dofmap, &interpolate(&*problem.g, dofmap, Target::Trace)?);
    let lambda = trace_to_volume(dofmap, &state.lambda);
    let mu = trace_to_volume(dofmap, &test.lambda);
    let edges = edge_rule(3 * k);
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        for (xi, _, w, normal) in boundary_points(dofmap, cell, &edges) {
            let jets = dofmap.basis().jets(xi);
            let at = |v: &[f64]| -> f64 { jets.iter().zip(dofs).map(|(j, &d)| j.v * v[d]).sum() };
            let du = combine(&jets, dofs.iter().map(|&d| state.u[d]), &map).grad;
            let mut s = 0.0;
            for c in 0..4 {
                s += du[c / 2] * at(&test.sigma[c * n..(c + 1) * n]) * normal[c % 2];
            }
            s += (at(&g_h) - at(&lambda)) * at(&mu);
            total += w * s;
        }
    }
    Ok(total)
}

/// `(‖τ‖²_{H¹} + ‖v‖²_{H¹} + ‖μ‖²_{L²(∂Ω)})^{1/2}` of a test triple.
pub fn test_function_norm(dofmap: &DofMap, test: &State) -> Result<f64> {
    let k = dofmap.degree();
    let n = dofmap.n_dofs();
    let rule = triangle_rule(2 * k)?;
    let tab = dofmap.basis().tabulate(&rule.points);
    let mut total = 0.0;
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        for (q, &w) in rule.weights.iter().enumerate() {
            let jets = tab.at(q);
            let h1 = |coeffs: &[f64]| {
                let f = combine(jets, dofs.iter().map(|&d| coeffs[d]), &map);
                sq(f.value) + sq(f.grad[0]) + sq(f.grad[1])
            };
            let mut s = h1(&test.u);
            for c in 0..4 {
                s += h1(&test.sigma[c * n..(c + 1) * n]);
            }
            total += w * map.measure() * s;
        }
    }
    let mu = trace_to_volume(dofmap, &test.lambda);
    total += crate::problems::boundary_integral(dofmap, 2 * k, |cell, xi, _| sq(dofmap.field_jet(&mu, cell, xi).value));
    Ok(sqrt(total))
}
