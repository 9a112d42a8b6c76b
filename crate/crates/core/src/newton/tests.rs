use super::*;
use crate::assembly::{asymmetry_l2, assemble_scalar_mass, min_det_and_diagonal, sigma_l2_norm};
use crate::lagrange::build_dofmap;
use crate::math::norm_inf;
use crate::mesh::{bisect, unit_square_mesh};
use crate::problems::builtin_problem;
use alloc::sync::Arc;

fn tight() -> NewtonOptions {
    NewtonOptions { tol_residual: 1e-12, ..NewtonOptions::default() }
}

#[test]
fn poisson_start_is_exact_for_the_quadratic() {
    let p = builtin_problem("quadratic").unwrap();
    let d = build_dofmap(&unit_square_mesh(4), 3).unwrap();
    let s = initial_guess(&p, &d).unwrap();
    let iu = interpolate(&*p.exact().unwrap().u, &d, Target::Volume).unwrap();
    let diff: Vec<f64> = s.u.iter().zip(&iu).map(|(a, b)| a - b).collect();
    assert!(norm_inf(&diff) <= 1e-10);
    assert_eq!(s.lambda, interpolate(&*p.g, &d, Target::Trace).unwrap());
}

#[test]
fn poisson_start_has_symmetric_sigma() {
    let p = builtin_problem("exp_radial").unwrap();
    let d = build_dofmap(&bisect(&unit_square_mesh(3), &[0, 5, 7]).unwrap(), 3).unwrap();
    let s = initial_guess(&p, &d).unwrap();
    let m = assemble_scalar_mass(&d);
    assert!(asymmetry_l2(&m, &s.sigma) <= 1e-9 * sigma_l2_norm(&m, &s.sigma));
}

#[test]
fn poisson_start_with_zero_data_dips_below_zero() {
    let p = Problem::new("zero_bc", Arc::new(|_| 1.0), Arc::new(|_| 0.0));
    let d = build_dofmap(&unit_square_mesh(2), 3).unwrap();
    let s = initial_guess(&p, &d).unwrap();
    assert!(s.u.iter().cloned().fold(f64::INFINITY, f64::min) < 0.0);
    assert!(s.u.iter().all(|&v| v <= 1e-14));
}

#[test]
fn nonpositive_f_is_rejected() {
    let p = Problem::new("bad", Arc::new(|x: [f64; 2]| x[0] - 0.5), Arc::new(|_| 0.0));
    let d = build_dofmap(&unit_square_mesh(2), 3).unwrap();
    assert!(matches!(initial_guess(&p, &d), Err(Error::Data(_))));
    assert!(matches!(newton_solve(&p, &d, &NewtonOptions::default()), Err(Error::Data(_))));
}

#[test]
fn invalid_options_are_rejected() {
    let p = builtin_problem("quadratic").unwrap();
    let d = build_dofmap(&unit_square_mesh(1), 3).unwrap();
    for opts in [
        NewtonOptions { tol_residual: 0.0, ..NewtonOptions::default() },
        NewtonOptions { max_iters: 0, ..NewtonOptions::default() },
        NewtonOptions { linear_tol: 1.5, ..NewtonOptions::default() },
    ] {
        assert!(matches!(newton_solve(&p, &d, &opts), Err(Error::Parameter(_))));
    }
}

#[test]
fn quadratic_problems_are_reproduced() {
    for name in ["quadratic", "product_quadratic"] {
        let p = builtin_problem(name).unwrap();
        let d = build_dofmap(&unit_square_mesh(4), 3).unwrap();
        let (s, stats) = newton_solve(&p, &d, &tight()).unwrap();
        // The Poisson start is exact only when D²u is a multiple of the identity.
        let budget = if name == "quadratic" { 2 } else { 6 };
        assert!(stats.converged && stats.iterations <= budget, "{name}: {stats:?}");
        assert!(*stats.residual_history.last().unwrap() <= 1e-12);
        let iu = interpolate(&*p.exact().unwrap().u, &d, Target::Volume).unwrap();
        let diff: Vec<f64> = s.u.iter().zip(&iu).map(|(a, b)| a - b).collect();
        assert!(norm_inf(&diff) <= 1e-10, "{name}");
    }
}

#[test]
fn exp_problem_converges_quadratically() {
    let p = builtin_problem("exp_radial").unwrap();
    let d = build_dofmap(&unit_square_mesh(8), 3).unwrap();
    let (s, stats) = newton_solve(&p, &d, &NewtonOptions::default()).unwrap();
    assert!(stats.converged && stats.iterations <= 15, "{stats:?}");
    let h = &stats.residual_history;
    assert!(*h.last().unwrap() <= 1e-10);
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
    assert!(stats.step_history.iter().all(|&t| t > 0.0 && t <= 1.0));
    // r_{m+1} ≤ C r_m² over the last three steps that land above the
    // roundoff floor of the residual evaluation.
    let pairs: Vec<(f64, f64)> = h.windows(2).map(|w| (w[0], w[1])).filter(|&(_, b)| b > 1e-12).collect();
    assert!(pairs.len() >= 3, "{h:?}");
    for &(a, b) in &pairs[pairs.len() - 3..] {
        assert!(b <= 10.0 * a * a, "{h:?}");
    }
    let (det_min, s11_min) = min_det_and_diagonal(&s, &d);
    assert!(det_min > 0.0 && s11_min > 0.0);
    assert_eq!(s.lambda, interpolate(&*p.g, &d, Target::Trace).unwrap());
    assert!(residual_norm(&p, &d, &s).unwrap() <= 1e-10);
}

#[test]
fn loose_tolerance_returns_immediately() {
    let p = builtin_problem("exp_radial").unwrap();
    let d = build_dofmap(&unit_square_mesh(2), 3).unwrap();
    let opts = NewtonOptions { tol_residual: 1e6, ..NewtonOptions::default() };
    let (s, stats) = newton_solve(&p, &d, &opts).unwrap();
    assert_eq!(stats.iterations, 0);
    assert!(stats.converged);
    assert_eq!(s, initial_guess(&p, &d).unwrap());
}

#[test]
fn iteration_budget_exhaustion_reports_history() {
    let p = builtin_problem("exp_radial").unwrap();
    let d = build_dofmap(&unit_square_mesh(4), 3).unwrap();
    let opts = NewtonOptions { max_iters: 1, tol_residual: 1e-300, ..NewtonOptions::default() };
    match newton_solve(&p, &d, &opts) {
        Err(Error::NotConverged { history }) => assert_eq!(history.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn warm_start_from_solution_needs_no_steps() {
    let p = builtin_problem("ball").unwrap();
    let d = build_dofmap(&unit_square_mesh(4), 3).unwrap();
    let (s, _) = newton_solve(&p, &d, &NewtonOptions::default()).unwrap();
    let (s2, stats) = newton_solve_from(&p, &d, &s.u, &NewtonOptions::default()).unwrap();
    assert!(stats.iterations <= 1);
    let diff: Vec<f64> = s.u.iter().zip(&s2.u).map(|(a, b)| a - b).collect();
    assert!(norm_inf(&diff) <= 1e-10);
    assert!(matches!(newton_solve_from(&p, &d, &s.u[1..], &NewtonOptions::default()), Err(Error::Internal(_))));
}

#[test]
fn undamped_iteration_also_converges_on_smooth_data() {
    let p = builtin_problem("exp_radial").unwrap();
    let d = build_dofmap(&unit_square_mesh(4), 4).unwrap();
    let opts = NewtonOptions { damping: Damping::None, ..NewtonOptions::default() };
    let (_, stats) = newton_solve(&p, &d, &opts).unwrap();
    assert!(stats.step_history.iter().all(|&t| t == 1.0));
}
