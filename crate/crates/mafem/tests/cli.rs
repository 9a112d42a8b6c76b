use std::path::{Path, PathBuf};

use mafem::cli::{run, EXIT_OK, EXIT_SOLVER, EXIT_USAGE};
use mafem::csv::read_records;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn mafem(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("mafem").chain(args.iter().copied()), &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn run_cfg(cmd: &str, text: &str, extra: &[&str]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), text);
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    mafem(&args)
}

#[test]
fn solve_quadratic_is_exact() {
    let o = run_cfg("solve", "problem.name = quadratic\nmesh.n = 2\ndiscretization.degree = 3\n", &[]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let t = read_records(&o.stdout).unwrap();
    assert_eq!(t.records.len(), 1);
    assert!(t.records[0].err_u_h1 <= 1e-9);
    assert!(t.observed_order_u_h1.is_none());
}

#[test]
fn degree_two_is_a_config_error() {
    let o = run_cfg("solve", "discretization.degree = 2\n", &[]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("degree k must be >= 3"), "{}", o.stderr);
}

#[test]
fn unknown_problem_lists_builtins() {
    let o = run_cfg("solve", "problem.name = nope\n", &[]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("quadratic") && o.stderr.contains("ball"), "{}", o.stderr);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(mafem(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(mafem(&["solve"]).code, EXIT_USAGE);
    let o = mafem(&["solve", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("/nonexistent/run.cfg"));
}

#[test]
fn solver_failure_exits_with_two() {
    let o = run_cfg("solve", "problem.name = exp_radial\nmesh.n = 2\nnewton.max_iters = 1\n", &[]);
    assert_eq!(o.code, EXIT_SOLVER, "{}", o.stderr);
    assert!(o.stderr.contains("Newton"), "{}", o.stderr);
}

#[test]
fn study_reports_the_observed_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "problem.name = exp_radial\nmesh.n = 4\ndiscretization.degree = 3\n");
    let csv = dir.path().join("study.csv");
    let o = mafem(&["study", "--config", cfg.to_str().unwrap(), "--levels", "3", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let t = read_records(&text).unwrap();
    assert_eq!(t.records.len(), 3);
    let order = t.observed_order_u_h1.unwrap();
    assert!((2.7..=3.3).contains(&order), "order {order}");
    assert!(text.lines().last().unwrap().starts_with("# observed_order_u_h1="));
}

#[test]
fn single_level_study_has_no_order_comment() {
    let o = run_cfg("study", "problem.name = exp_radial\nmesh.n = 2\n", &["--levels", "1"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout.lines().count(), 2);
    assert!(!o.stdout.contains('#'));
}

#[test]
fn study_needs_a_builtin_mesh() {
    let o = run_cfg("study", "problem.name = exp_radial\nmesh.file = square.mesh\n", &[]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("mesh.n"), "{}", o.stderr);
}

#[test]
fn adapt_ball_adds_dofs_every_level_and_writes_vtu() {
    let dir = tempfile::tempdir().unwrap();
    let vtu = dir.path().join("vtu");
    let text = format!(
        "problem.name = ball\nmesh.n = 2\nadapt.theta = 0.5\nadapt.max_levels = 4\noutput.vtu_dir = {}\n",
        vtu.display()
    );
    let cfg = config(dir.path(), &text);
    let o = mafem(&["adapt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let t = read_records(&o.stdout).unwrap();
    assert_eq!(t.records.len(), 4);
    assert!(t.records.windows(2).all(|w| w[1].ndof > w[0].ndof));
    for level in 0..4 {
        let body = std::fs::read_to_string(vtu.join(format!("level_{level:03}.vtu"))).unwrap();
        assert!(body.contains("Name=\"theta_K\""));
        assert!(body.contains("Name=\"zeta_K\""));
        assert!(body.contains("Name=\"u\""));
    }
}

#[test]
fn adapt_with_zero_theta_is_rejected() {
    let o = run_cfg("adapt", "problem.name = ball\nmesh.n = 2\nadapt.theta = 0\n", &[]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("theta"), "{}", o.stderr);
}

#[test]
fn adapt_reads_a_mesh_file() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("square.mesh");
    mafem::mesh_io::save_mesh(&mesh, &mafem_core::mesh::unit_square_mesh(2)).unwrap();
    let cfg = config(dir.path(), &format!("problem.name = quadratic\nmesh.file = {}\nadapt.max_levels = 2\n", mesh.display()));
    let o = mafem(&["adapt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(read_records(&o.stdout).unwrap().records.len(), 2);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let text = "problem.name = ball\nmesh.n = 2\nadapt.max_levels = 3\nthreads = 3\n";
    let a = run_cfg("adapt", text, &[]);
    let b = run_cfg("adapt", &text.replace("threads = 3", "threads = 1"), &[]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
}
