//! Damped Newton iteration for the discrete mixed system.
//!
//! The unknowns are `s` (coefficients of `σ_h`) and the interior values of
//! `u_h`; boundary values are fixed to `g_h` and `λ_h = g_h`. Each step solves
//!
//! ```text
//! [ M  B_free ] [δs]     [r₁]
//! [ C  0      ] [δu] = − [r₂]
//! ```
//!
//! by eliminating `δs` (`M` is four copies of the scalar mass matrix) and
//! running GMRES on `C M⁻¹ B_free`, preconditioned with the cofactor-weighted
//! stiffness matrix.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{
    apply_dirichlet, assemble_cofactor_stiffness, assemble_stiffness, cof_jacobian_with, det_residual_with,
    interior_numbering, nonlinear_degree, reconstruct_hessian, Dirichlet, SystemBlocks, TabulatedRule,
};
use crate::error::{Error, Result};
use crate::lagrange::{interpolate, DofMap, State, Target, INTERIOR};
use crate::math::{norm2, sqrt};
use crate::problems::Problem;
use crate::sparse::{gmres, BandedLu, CsrMatrix, GmresOptions};

pub use crate::sparse::solve_linear;

/// Maximum number of step halvings in the line search.
pub const MAX_HALVINGS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    /// Always take the full Newton step.
    None,
    /// Take the largest step `2^{-m} δ`, `m ≤ 30`, that reduces the residual.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance on the euclidean norm of the stacked residual.
    pub tol_residual: f64,
    pub max_iters: usize,
    pub damping: Damping,
    /// Relative tolerance of the inner GMRES solve.
    pub linear_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol_residual: 1e-10, max_iters: 30, damping: Damping::Backtracking, linear_tol: 1e-12 }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(Error::Parameter(format!("tol_residual must be > 0, got {}", self.tol_residual)));
        }
        if self.max_iters < 1 {
            return Err(Error::Parameter("max_iters must be >= 1".to_string()));
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1.0) {
            return Err(Error::Parameter(format!("linear_tol must lie in (0,1), got {}", self.linear_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Residual norm before the first step and after every accepted step.
    pub residual_history: Vec<f64>,
    /// Accepted step lengths.
    pub step_history: Vec<f64>,
    /// Total inner GMRES iterations.
    pub linear_iterations: usize,
    pub converged: bool,
}

/// Mesh-dependent data shared by all Newton steps on one space.
struct Context<'a> {
    dofmap: &'a DofMap,
    blocks: SystemBlocks,
    mass_lu: BandedLu,
    dirichlet: Dirichlet,
    rule: TabulatedRule,
    rows: Vec<usize>,
}

impl<'a> Context<'a> {
    fn new(problem: &Problem, dofmap: &'a DofMap) -> Result<Self> {
        let blocks = SystemBlocks::assemble(dofmap);
        let mass_lu = BandedLu::factor(&blocks.mass)?;
        let g_h = interpolate(&*problem.g, dofmap, Target::Trace)?;
        let dirichlet = apply_dirichlet(&blocks, dofmap, &g_h)?;
        let rule = TabulatedRule::new(dofmap, nonlinear_degree(dofmap))?;
        let rows = interior_numbering(dofmap);
        Ok(Context { dofmap, blocks, mass_lu, dirichlet, rule, rows })
    }

    fn n(&self) -> usize {
        self.dofmap.n_dofs()
    }

    fn apply_mass_inv(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; 4 * n];
        for c in 0..4 {
            out[c * n..(c + 1) * n].copy_from_slice(&self.mass_lu.solve(&v[c * n..(c + 1) * n]));
        }
        out
    }

    /// Builds a full state from `u`: boundary values reset to `g_h`,
    /// `σ_h` from the first equation and `λ_h = g_h`.
    fn state_from_u(&self, u: &[f64]) -> State {
        let u = self.dirichlet.expand(&self.dirichlet.restrict(u));
        let sigma = reconstruct_hessian(&self.blocks, &self.mass_lu, &u);
        State { sigma, u, lambda: self.dirichlet.values.clone() }
    }

    fn residual(&self, state: &State, problem: &Problem) -> (Vec<f64>, Vec<f64>) {
        let r1 = self.blocks.first_residual(&state.sigma, &state.u);
        let r2 = det_residual_with(state, self.dofmap, &*problem.f, &self.rule, &self.rows);
        (r1, r2)
    }
}

fn stacked_norm(r1: &[f64], r2: &[f64]) -> f64 {
    sqrt(crate::math::sq(norm2(r1)) + crate::math::sq(norm2(r2)))
}

/// Poisson start `Δu⁰ = 2√f`, `u⁰ = g_h` on `∂Ω`, with `σ⁰ = M⁻¹(−B u⁰)`
/// and `λ⁰ = g_h`.
pub fn initial_guess(problem: &Problem, dofmap: &DofMap) -> Result<State> {
    let ctx = Context::new(problem, dofmap)?;
    poisson_start(problem, &ctx)
}

fn poisson_start(problem: &Problem, ctx: &Context<'_>) -> Result<State> {
    let dofmap = ctx.dofmap;
    let free = &ctx.dirichlet.free;
    let col_map: Vec<Option<usize>> = ctx.dirichlet.free_index.iter().map(|&r| (r != INTERIOR).then_some(r)).collect();
    let k = assemble_stiffness(dofmap);
    let k_free = k.select(free, &col_map, free.len());

    let mut load = vec![0.0; dofmap.n_dofs()];
    let q = &ctx.rule;
    for cell in 0..dofmap.mesh().num_cells() {
        let map = dofmap.cell_map(cell);
        let dofs = dofmap.cell_dofs(cell);
        for (qi, &w) in q.rule.weights.iter().enumerate() {
            let x = map.to_physical(q.rule.points[qi]);
            let fx = (problem.f)(x);
            if !(fx > 0.0) {
                return Err(Error::Data(format!(
                    "f must be positive, got f({:.6}, {:.6}) = {fx}",
                    x[0], x[1]
                )));
            }
            let s = 2.0 * sqrt(fx) * w * map.measure();
            for (&d, j) in dofs.iter().zip(q.tab.at(qi)) {
                load[d] += s * j.v;
            }
        }
    }
    let lifted = k.mul_vec(&ctx.dirichlet.expand(&vec![0.0; free.len()]));
    let rhs: Vec<f64> = free.iter().map(|&d| -load[d] - lifted[d]).collect();
    let u_free = if free.is_empty() { Vec::new() } else { solve_linear(&k_free, &rhs)? };
    Ok(ctx.state_from_u(&ctx.dirichlet.expand(&u_free)))
}

/// Newton's method from the Poisson start.
pub fn newton_solve(problem: &Problem, dofmap: &DofMap, opts: &NewtonOptions) -> Result<(State, SolveStats)> {
    opts.validate()?;
    let ctx = Context::new(problem, dofmap)?;
    let start = poisson_start(problem, &ctx)?;
    iterate(problem, &ctx, start, opts)
}

/// Newton's method from a given `u_h` (for instance a coarse solution
/// transferred to a refined mesh). Boundary values are reset to `g_h` and
/// `σ_h` is recomputed from the first equation.
pub fn newton_solve_from(problem: &Problem, dofmap: &DofMap, u: &[f64], opts: &NewtonOptions) -> Result<(State, SolveStats)> {
    opts.validate()?;
    if u.len() != dofmap.n_dofs() {
        return Err(Error::Internal(format!("start vector has {} entries, expected {}", u.len(), dofmap.n_dofs())));
    }
    let ctx = Context::new(problem, dofmap)?;
    let start = ctx.state_from_u(u);
    iterate(problem, &ctx, start, opts)
}

fn iterate(problem: &Problem, ctx: &Context<'_>, mut state: State, opts: &NewtonOptions) -> Result<(State, SolveStats)> {
    let n = ctx.n();
    let (mut r1, mut r2) = ctx.residual(&state, problem);
    let mut norm = stacked_norm(&r1, &r2);
    let mut stats = SolveStats { residual_history: vec![norm], ..SolveStats::default() };
    if !norm.is_finite() {
        return Err(Error::Diverged { iteration: 0, reason: "non-finite initial residual".to_string() });
    }
    let b_free = &ctx.dirichlet.hessian_free;
    let free = &ctx.dirichlet.free;
    loop {
        if norm <= opts.tol_residual {
            stats.converged = true;
            return Ok((state, stats));
        }
        if stats.iterations >= opts.max_iters {
            return Err(Error::NotConverged { history: stats.residual_history });
        }
        let it = stats.iterations + 1;
        let diverged = |e: Error| Error::Diverged { iteration: it, reason: format!("linear solve failed: {e}") };

        let c = cof_jacobian_with(&state, ctx.dofmap, &ctx.rule, &ctx.rows);
        let minv_r1 = ctx.apply_mass_inv(&r1);
        let delta_u = if free.is_empty() {
            Vec::new()
        } else {
            let c_minv_r1 = c.mul_vec(&minv_r1);
            let rhs: Vec<f64> = r2.iter().zip(&c_minv_r1).map(|(a, b)| a - b).collect();
            let schur = |x: &[f64], y: &mut [f64]| {
                let bx = b_free.mul_vec(x);
                let z = ctx.apply_mass_inv(&bx);
                c.mul_vec_into(&z, y);
            };
            let precond = preconditioner(&state, ctx)?;
            let gopts = GmresOptions { rel_tol: opts.linear_tol, ..GmresOptions::default() };
            let (x, its) = gmres(&schur, &|v: &[f64]| precond.solve(v), &rhs, &gopts).map_err(diverged)?;
            stats.linear_iterations += its;
            x
        };
        // δs = M⁻¹(−r₁ − B_free δu)
        let b_du = b_free.mul_vec(&delta_u);
        let delta_s: Vec<f64> = ctx.apply_mass_inv(&b_du).iter().zip(&minv_r1).map(|(a, b)| -a - b).collect();

        let mut step = 1.0;
        let mut accepted = None;
        for m in 0..=MAX_HALVINGS {
            let mut trial = state.clone();
            for (s, d) in trial.sigma.iter_mut().zip(&delta_s) {
                *s += step * d;
            }
            for (&dof, d) in free.iter().zip(&delta_u) {
                trial.u[dof] += step * d;
            }
            let (t1, t2) = ctx.residual(&trial, problem);
            let tn = stacked_norm(&t1, &t2);
            if opts.damping == Damping::None {
                accepted = Some((trial, t1, t2, tn));
                break;
            }
            if tn < norm {
                accepted = Some((trial, t1, t2, tn));
                break;
            }
            if m < MAX_HALVINGS {
                step *= 0.5;
            }
        }
        let Some((trial, t1, t2, tn)) = accepted else {
            return Err(Error::Diverged {
                iteration: it,
                reason: format!("no step length down to 2^-{MAX_HALVINGS} reduces the residual {norm:e}"),
            });
        };
        if !tn.is_finite() {
            return Err(Error::Diverged { iteration: it, reason: "non-finite residual".to_string() });
        }
        state = trial;
        r1 = t1;
        r2 = t2;
        norm = tn;
        stats.iterations = it;
        stats.residual_history.push(norm);
        stats.step_history.push(step);
        debug_assert_eq!(state.sigma.len(), 4 * n);
    }
}

/// Factorization of the cofactor stiffness, falling back to the plain
/// Laplacian when `σ_h` is far from convex and the weighted matrix is
/// singular.
fn preconditioner(state: &State, ctx: &Context<'_>) -> Result<BandedLu> {
    match BandedLu::factor(&assemble_cofactor_stiffness(state, ctx.dofmap)) {
        Ok(lu) => Ok(lu),
        Err(_) => {
            let free = &ctx.dirichlet.free;
            let col_map: Vec<Option<usize>> =
                ctx.dirichlet.free_index.iter().map(|&r| (r != INTERIOR).then_some(r)).collect();
            let k: CsrMatrix = assemble_stiffness(ctx.dofmap).select(free, &col_map, free.len());
            BandedLu::factor(&k)
        }
    }
}

/// Euclidean norm of the stacked nonlinear residual at `state`.
pub fn residual_norm(problem: &Problem, dofmap: &DofMap, state: &State) -> Result<f64> {
    let ctx = Context::new(problem, dofmap)?;
    let (r1, r2) = ctx.residual(state, problem);
    Ok(stacked_norm(&r1, &r2))
}

#[cfg(test)]
mod tests;
