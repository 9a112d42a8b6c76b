//! Uniform convergence studies and the adaptive solve, estimate, mark,
//! refine loop.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimator::{
    effectivity, local_indicators, data_oscillation, mark_dorfler, EstimatorOptions, IndicatorReport, OscillationReport,
};
use crate::lagrange::{build_dofmap, DofMap, State};
use crate::math::log2;
use crate::mesh::{bisect_with_parents, shape_metrics, unit_square_mesh, Mesh};
use crate::newton::{newton_solve, newton_solve_from, NewtonOptions, SolveStats};
use crate::problems::{compute_errors, ErrorReport, Problem};

/// One row of a convergence table. Error columns are `NaN` when the problem
/// has no exact solution, and `effectivity` is `NaN` when it is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    /// Dimension of `V_h`.
    pub ndof: usize,
    pub h_max: f64,
    pub err_u_l2: f64,
    pub err_u_h1: f64,
    pub err_u_h2b: f64,
    pub err_sigma_l2: f64,
    pub err_sigma_h1: f64,
    pub theta: f64,
    pub zeta: f64,
    pub effectivity: f64,
    pub newton_iters: usize,
}

/// Computes the indicators and the data oscillation of a solved level.
/// Implemented by the serial estimator here and by threaded front ends.
pub trait Estimate {
    fn estimate(
        &self,
        state: &State,
        dofmap: &DofMap,
        problem: &Problem,
        opts: EstimatorOptions,
    ) -> Result<(IndicatorReport, OscillationReport)>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SerialEstimator;

impl Estimate for SerialEstimator {
    fn estimate(
        &self,
        state: &State,
        dofmap: &DofMap,
        problem: &Problem,
        opts: EstimatorOptions,
    ) -> Result<(IndicatorReport, OscillationReport)> {
        Ok((local_indicators(state, dofmap, problem, opts)?, data_oscillation(problem, dofmap, opts)?))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Settings {
    pub newton: NewtonOptions,
    pub estimator: EstimatorOptions,
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub dofmap: DofMap,
    pub state: State,
    pub stats: SolveStats,
    pub indicators: IndicatorReport,
    pub oscillation: OscillationReport,
    pub errors: Option<ErrorReport>,
    pub record: ConvergenceRecord,
}

/// Solves on `mesh`, from the Poisson start or from a given `u_h`, then
/// estimates and (when an exact solution exists) measures the error.
pub fn solve_level(
    problem: &Problem,
    mesh: &Mesh,
    degree: usize,
    level: usize,
    start: Option<&[f64]>,
    settings: &Settings,
    estimator: &dyn Estimate,
) -> Result<LevelResult> {
    let dofmap = build_dofmap(mesh, degree)?;
    let (state, stats) = match start {
        Some(u) => newton_solve_from(problem, &dofmap, u, &settings.newton)?,
        None => newton_solve(problem, &dofmap, &settings.newton)?,
    };
    let (indicators, oscillation) = estimator.estimate(&state, &dofmap, problem, settings.estimator)?;
    let errors = match problem.exact {
        Some(_) => Some(compute_errors(&state, &dofmap, problem)?),
        None => None,
    };
    let e = errors.unwrap_or(ErrorReport {
        err_u_l2: f64::NAN,
        err_u_h1: f64::NAN,
        err_u_h2_broken: f64::NAN,
        err_sigma_l2: f64::NAN,
        err_sigma_h1: f64::NAN,
        err_lambda_l2_boundary: f64::NAN,
    });
    let eff = match &errors {
        Some(e) => effectivity(&indicators, e).unwrap_or(f64::NAN),
        None => f64::NAN,
    };
    let record = ConvergenceRecord {
        level,
        ndof: dofmap.n_dofs(),
        h_max: shape_metrics(mesh)?.h_max,
        err_u_l2: e.err_u_l2,
        err_u_h1: e.err_u_h1,
        err_u_h2b: e.err_u_h2_broken,
        err_sigma_l2: e.err_sigma_l2,
        err_sigma_h1: e.err_sigma_h1,
        theta: indicators.theta(),
        zeta: oscillation.zeta(),
        effectivity: eff,
        newton_iters: stats.iterations,
    };
    Ok(LevelResult { dofmap, state, stats, indicators, oscillation, errors, record })
}

/// `log₂(e_ℓ / e_{ℓ+1})` for successive entries.
pub fn observed_orders(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| log2(w[0] / w[1])).collect()
}

/// Convergence table on the structured meshes `n0 · 2^ℓ`, `ℓ < levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformStudy {
    pub records: Vec<ConvergenceRecord>,
}

impl UniformStudy {
    pub fn orders(&self, column: impl Fn(&ConvergenceRecord) -> f64) -> Vec<f64> {
        let v: Vec<f64> = self.records.iter().map(column).collect();
        observed_orders(&v)
    }

    /// Observed orders of `‖u − u_h‖_{H¹}`.
    pub fn orders_u_h1(&self) -> Vec<f64> {
        self.orders(|r| r.err_u_h1)
    }

    /// Observed orders of `‖σ − σ_h‖_{L²}`.
    pub fn orders_sigma_l2(&self) -> Vec<f64> {
        self.orders(|r| r.err_sigma_l2)
    }
}

pub fn uniform_study(
    problem: &Problem,
    degree: usize,
    n0: usize,
    levels: usize,
    settings: &Settings,
    estimator: &dyn Estimate,
) -> Result<UniformStudy> {
    problem.exact()?;
    if n0 == 0 || levels == 0 {
        return Err(Error::Parameter(format!("need n0 >= 1 and levels >= 1, got n0 = {n0}, levels = {levels}")));
    }
    let mut records = Vec::with_capacity(levels);
    for level in 0..levels {
        let mesh = unit_square_mesh(n0 << level);
        let r = solve_level(problem, &mesh, degree, level, None, settings, estimator).map_err(|e| e.at_level(level))?;
        records.push(r.record);
    }
    Ok(UniformStudy { records })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    /// Stop once `Θ ≤ theta_tol`.
    pub theta_tol: f64,
    /// Stop once the mesh has at least this many cells.
    pub max_cells: Option<usize>,
    /// Total number of solved levels.
    pub max_levels: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria { theta_tol: 0.0, max_cells: None, max_levels: 6 }
    }
}

/// Per-level data handed to observers of the adaptive loop.
pub struct LevelView<'a> {
    pub level: usize,
    pub mesh: &'a Mesh,
    pub result: &'a LevelResult,
}

#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub mesh: Mesh,
    pub last: LevelResult,
}

/// An adaptive run that stopped on an error, with the levels completed so far.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct AdaptiveFailure {
    pub records: Vec<ConvergenceRecord>,
    #[source]
    pub error: Error,
}

/// Cell-wise transfer of `u_h` from a mesh to one refined from it. `parents`
/// maps every fine cell to the coarse cell containing it.
pub fn transfer_u(coarse: &DofMap, u: &[f64], fine: &DofMap, parents: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; fine.n_dofs()];
    let points = fine.dof_points();
    for (cell, &parent) in parents.iter().enumerate() {
        let map = coarse.cell_map(parent);
        for &d in fine.cell_dofs(cell) {
            out[d] = coarse.field_jet(u, parent, map.to_reference(points[d])).value;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptOptions {
    pub degree: usize,
    /// Dörfler bulk parameter in `(0, 1]`.
    pub theta: f64,
    pub stop: StopCriteria,
    pub settings: Settings,
}

/// Runs the adaptive loop from `mesh`. Every level after the first starts
/// Newton from the previous `u_h` transferred to the refined mesh.
pub fn adaptive_loop(
    problem: &Problem,
    mesh: &Mesh,
    opts: &AdaptOptions,
    estimator: &dyn Estimate,
    on_level: &mut dyn FnMut(&LevelView<'_>),
) -> core::result::Result<AdaptiveOutcome, AdaptiveFailure> {
    let AdaptOptions { degree, theta, stop, ref settings } = *opts;
    let fail = |records: Vec<ConvergenceRecord>, error: Error| AdaptiveFailure { records, error };
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(fail(Vec::new(), Error::Parameter(format!("Dörfler parameter theta must lie in (0, 1], got {theta}"))));
    }
    if stop.max_levels == 0 {
        return Err(fail(Vec::new(), Error::Parameter("max_levels must be >= 1".into())));
    }
    let mut records = Vec::new();
    let mut mesh = mesh.clone();
    let mut start: Option<Vec<f64>> = None;
    let mut level = 0;
    loop {
        let result = match solve_level(problem, &mesh, degree, level, start.as_deref(), settings, estimator) {
            Ok(r) => r,
            Err(e) => return Err(fail(records, e.at_level(level))),
        };
        records.push(result.record);
        on_level(&LevelView { level, mesh: &mesh, result: &result });

        let done = result.record.theta <= stop.theta_tol
            || level + 1 >= stop.max_levels
            || stop.max_cells.is_some_and(|m| mesh.num_cells() >= m);
        if done {
            return Ok(AdaptiveOutcome { records, mesh, last: result });
        }
        let step = mark_dorfler(&result.indicators, theta)
            .and_then(|marked| bisect_with_parents(&mesh, &marked))
            .and_then(|(fine, parents)| {
                let fine_dofs = build_dofmap(&fine, degree)?;
                let u = transfer_u(&result.dofmap, &result.state.u, &fine_dofs, &parents);
                Ok((fine, u))
            });
        match step {
            Ok((fine, u)) => {
                mesh = fine;
                start = Some(u);
            }
            Err(e) => return Err(fail(records, e.at_level(level))),
        }
        level += 1;
    }
}
