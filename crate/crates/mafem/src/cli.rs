//! Command-line driver: `mafem solve|study|adapt --config <path> [--levels N] [--out <csv>]`.
//!
//! Exit codes: 0 on success, 1 on usage, configuration or IO errors,
//! 2 when the solver fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mafem_core::adapt::{adaptive_loop, solve_level, uniform_study, AdaptOptions, LevelView};
use mafem_core::mesh::{unit_square_mesh, Mesh};
use mafem_core::problems::builtin_problem;

use crate::config::{MeshSource, RunConfig};
use crate::csv::write_records;
use crate::error::{io_err, Error, Result};
use crate::mesh_io::load_mesh;
use crate::parallel::ThreadedEstimator;
use crate::vtu::write_vtu;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mafem", version, about = "Adaptive mixed finite elements for det D²u = f")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Configuration file (`section.key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output path; overrides `output.csv`. Without either the table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and estimate once on the configured mesh.
    Solve(Common),
    /// Uniform refinement study of an exact-solution problem.
    Study {
        #[command(flatten)]
        common: Common,
        /// Number of levels; overrides `study.levels`.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Adaptive solve/estimate/mark/refine loop.
    Adapt {
        #[command(flatten)]
        common: Common,
        /// Number of levels; overrides `adapt.max_levels`.
        #[arg(long)]
        levels: Option<usize>,
    },
}

enum Failure {
    Usage(Error),
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        use mafem_core::Error as Core;
        match e {
            Error::Solver(Core::Parameter(_) | Core::UnsupportedDegree { .. } | Core::UnknownProblem { .. } | Core::InvalidMesh(_)) => {
                Failure::Usage(e)
            }
            Error::Solver(_) => Failure::Solver(e),
            other => Failure::Usage(other),
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Solver(e)) => {
            let _ = writeln!(stderr, "solver failure: {e}");
            EXIT_SOLVER
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&common.config).map_err(io_err(&common.config))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(out) = &common.out {
        cfg.csv = Some(out.clone());
    }
    Ok(cfg)
}

fn build_mesh(cfg: &RunConfig) -> Result<Mesh> {
    match &cfg.mesh {
        MeshSource::Builtin(n) => Ok(unit_square_mesh(*n)),
        MeshSource::File(p) => load_mesh(p),
    }
}

fn emit_csv(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.csv {
        Some(p) => std::fs::write(p, text).map_err(io_err(p)),
        None => stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

fn write_level_vtu(dir: &Path, view: &LevelView<'_>) -> Result<()> {
    let r = view.result;
    let text = write_vtu(&r.dofmap, &r.state.u, &r.indicators.local_squares(), &r.oscillation.cells);
    let path = dir.join(format!("level_{:03}.vtu", view.level));
    std::fs::write(&path, text).map_err(io_err(&path))
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Solve(common) => {
            let cfg = load_config(&common)?;
            let problem = builtin_problem(&cfg.problem).map_err(|e| Failure::Usage(e.into()))?;
            let mesh = build_mesh(&cfg)?;
            let estimator = ThreadedEstimator::new(cfg.threads);
            let r = solve_level(&problem, &mesh, cfg.degree, 0, None, &cfg.settings(), &estimator)
                .map_err(|e| Failure::from(Error::from(e)))?;
            emit_csv(&cfg, &write_records(&[r.record], None), stdout)?;
            if let Some(dir) = &cfg.vtu_dir {
                std::fs::create_dir_all(dir).map_err(io_err(dir))?;
                write_level_vtu(dir, &LevelView { level: 0, mesh: &mesh, result: &r })?;
            }
            Ok(())
        }
        Command::Study { common, levels } => {
            let mut cfg = load_config(&common)?;
            if let Some(l) = levels {
                cfg.study_levels = l;
            }
            cfg.validate()?;
            let MeshSource::Builtin(n0) = cfg.mesh else {
                return Err(Failure::Usage(Error::Config("study needs a builtin mesh (mesh.n)".into())));
            };
            let problem = builtin_problem(&cfg.problem).map_err(|e| Failure::Usage(e.into()))?;
            if problem.exact.is_none() {
                return Err(Failure::Usage(Error::Config(format!("problem '{}' has no exact solution to study", cfg.problem))));
            }
            let estimator = ThreadedEstimator::new(cfg.threads);
            let study = uniform_study(&problem, cfg.degree, n0, cfg.study_levels, &cfg.settings(), &estimator)
                .map_err(|e| Failure::from(Error::from(e)))?;
            let order = study.orders_u_h1().last().copied();
            emit_csv(&cfg, &write_records(&study.records, order), stdout)?;
            Ok(())
        }
        Command::Adapt { common, levels } => {
            let mut cfg = load_config(&common)?;
            if let Some(l) = levels {
                cfg.stop.max_levels = l;
            }
            cfg.validate()?;
            let problem = builtin_problem(&cfg.problem).map_err(|e| Failure::Usage(e.into()))?;
            let mesh = build_mesh(&cfg)?;
            if let Some(dir) = &cfg.vtu_dir {
                std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            let opts = AdaptOptions { degree: cfg.degree, theta: cfg.theta, stop: cfg.stop, settings: cfg.settings() };
            let estimator = ThreadedEstimator::new(cfg.threads);
            let mut vtu_error = None;
            let mut on_level = |view: &LevelView<'_>| {
                if let (Some(dir), None) = (&cfg.vtu_dir, &vtu_error) {
                    vtu_error = write_level_vtu(dir, view).err();
                }
            };
            let outcome = adaptive_loop(&problem, &mesh, &opts, &estimator, &mut on_level);
            match outcome {
                Ok(out) => {
                    emit_csv(&cfg, &write_records(&out.records, None), stdout)?;
                    vtu_error.map_or(Ok(()), |e| Err(e.into()))
                }
                Err(fail) => {
                    if !fail.records.is_empty() {
                        let _ = writeln!(stderr, "writing {} completed level(s) before the failure", fail.records.len());
                        emit_csv(&cfg, &write_records(&fail.records, None), stdout)?;
                    }
                    Err(Failure::from(Error::from(fail.error)))
                }
            }
        }
    }
}
