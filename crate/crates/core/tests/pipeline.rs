use mafem_core::adapt::{adaptive_loop, uniform_study, AdaptOptions, SerialEstimator, Settings, StopCriteria};
use mafem_core::mesh::unit_square_mesh;
use mafem_core::problems::builtin_problem;

#[test]
fn quadratic_study_is_exact_on_every_level() {
    let problem = builtin_problem("quadratic").unwrap();
    let study = uniform_study(&problem, 3, 1, 3, &Settings::default(), &SerialEstimator).unwrap();
    assert_eq!(study.records.len(), 3);
    for r in &study.records {
        assert!(r.err_u_h1 < 1e-9, "level {}: {}", r.level, r.err_u_h1);
        assert!(r.newton_iters <= 2);
    }
}

#[test]
fn adaptive_loop_stops_at_the_cell_budget() {
    let problem = builtin_problem("exp_radial").unwrap();
    let opts = AdaptOptions {
        degree: 3,
        theta: 0.5,
        stop: StopCriteria { max_cells: Some(40), max_levels: 10, ..StopCriteria::default() },
        settings: Settings::default(),
    };
    let mut seen = Vec::new();
    let out = adaptive_loop(&problem, &unit_square_mesh(2), &opts, &SerialEstimator, &mut |v| seen.push(v.mesh.num_cells()))
        .unwrap();
    assert_eq!(seen.len(), out.records.len());
    assert!(*seen.last().unwrap() >= 40);
    assert!(seen[..seen.len() - 1].iter().all(|&n| n < 40));
}
