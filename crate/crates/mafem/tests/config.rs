use std::path::PathBuf;

use mafem::config::{MeshSource, RunConfig};
use mafem_core::estimator::CofactorSource;
use mafem_core::newton::Damping;

const FULL: &str = "\
# adaptive ball run
threads = 4
problem.name = ball
discretization.degree = 4
mesh.file = meshes/square.mesh
newton.tol = 1e-9
newton.max_iters = 12
newton.damping = none
newton.linear_tol = 1e-11
estimator.cofactor_source = sigma
estimator.quadrature_bump = 2
adapt.theta = 0.3
adapt.max_levels = 5
adapt.max_cells = 2000
adapt.theta_tol = 1e-4
study.levels = 4
output.csv = out/ball.csv
output.vtu_dir = out/vtu
";

#[test]
fn every_key_is_parsed() {
    let c = RunConfig::parse(FULL).unwrap();
    assert_eq!(c.threads, 4);
    assert_eq!(c.problem, "ball");
    assert_eq!(c.degree, 4);
    assert_eq!(c.mesh, MeshSource::File(PathBuf::from("meshes/square.mesh")));
    assert_eq!(c.newton.tol_residual, 1e-9);
    assert_eq!(c.newton.max_iters, 12);
    assert_eq!(c.newton.damping, Damping::None);
    assert_eq!(c.newton.linear_tol, 1e-11);
    assert_eq!(c.estimator.cofactor_source, CofactorSource::Sigma);
    assert_eq!(c.estimator.quadrature_bump, 2);
    assert_eq!(c.theta, 0.3);
    assert_eq!(c.stop.max_levels, 5);
    assert_eq!(c.stop.max_cells, Some(2000));
    assert_eq!(c.stop.theta_tol, 1e-4);
    assert_eq!(c.study_levels, 4);
    assert_eq!(c.csv, Some(PathBuf::from("out/ball.csv")));
    assert_eq!(c.vtu_dir, Some(PathBuf::from("out/vtu")));
}

#[test]
fn serialization_is_idempotent() {
    for text in [FULL, "", "problem.name = exp_radial\nmesh.n = 8\nadapt.theta = 0.1\n"] {
        let once = RunConfig::parse(text).unwrap().to_text();
        let parsed = RunConfig::parse(&once).unwrap();
        assert_eq!(parsed, RunConfig::parse(text).unwrap());
        assert_eq!(parsed.to_text(), once);
    }
}

#[test]
fn degree_below_three_is_rejected() {
    let err = RunConfig::parse("discretization.degree = 2").unwrap_err().to_string();
    assert!(err.contains("degree k must be >= 3"), "{err}");
}

#[test]
fn unknown_problem_lists_the_builtins() {
    let err = RunConfig::parse("problem.name = saddle").unwrap_err().to_string();
    for name in ["quadratic", "product_quadratic", "exp_radial", "ball"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn theta_outside_the_unit_interval_is_rejected() {
    for v in ["0", "-0.5", "1.5", "NaN"] {
        assert!(RunConfig::parse(&format!("adapt.theta = {v}")).is_err(), "theta = {v}");
    }
    assert!(RunConfig::parse("adapt.theta = 1").is_ok());
}

#[test]
fn other_invalid_values() {
    for text in ["mesh.n = 0", "threads = 0", "newton.tol = -1", "study.levels = 0", "adapt.max_levels = x"] {
        assert!(RunConfig::parse(text).is_err(), "{text}");
    }
}
