use mafem::parallel::ThreadedEstimator;
use mafem_core::adapt::{Estimate, SerialEstimator};
use mafem_core::estimator::EstimatorOptions;
use mafem_core::lagrange::DofMap;
use mafem_core::mesh::unit_square_mesh;
use mafem_core::newton::{newton_solve, NewtonOptions};
use mafem_core::problems::builtin_problem;

#[test]
fn threaded_reports_match_serial_exactly() {
    let problem = builtin_problem("exp_radial").unwrap();
    let mesh = unit_square_mesh(3);
    let dofmap = DofMap::new(&mesh, 3).unwrap();
    let (state, _) = newton_solve(&problem, &dofmap, &NewtonOptions::default()).unwrap();
    let opts = EstimatorOptions::default();
    let (ind, osc) = SerialEstimator.estimate(&state, &dofmap, &problem, opts).unwrap();
    // 18 cells: even split, uneven split, more threads than cells
    for threads in [1, 2, 4, 7, 64] {
        let (ti, to) = ThreadedEstimator::new(threads).estimate(&state, &dofmap, &problem, opts).unwrap();
        assert_eq!(ti, ind, "threads = {threads}");
        assert_eq!(to, osc, "threads = {threads}");
    }
}
