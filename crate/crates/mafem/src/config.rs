//! Run configuration: flat `section.key = value` lines with `#` comments.
//!
//! Every key is optional; [`RunConfig::default`] supplies the rest.
//! [`RunConfig::to_text`] writes every key in a fixed order, so
//! `to_text(parse(text))` is a fixed point.

use std::fmt::Write as _;
use std::path::PathBuf;

use mafem_core::adapt::{Settings, StopCriteria};
use mafem_core::estimator::{CofactorSource, EstimatorOptions};
use mafem_core::newton::{Damping, NewtonOptions};
use mafem_core::problems::BUILTIN_PROBLEMS;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Uniform `n × n` criss-cross mesh of the unit square.
    Builtin(usize),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub degree: usize,
    pub mesh: MeshSource,
    pub newton: NewtonOptions,
    pub estimator: EstimatorOptions,
    pub theta: f64,
    pub stop: StopCriteria,
    pub study_levels: usize,
    pub csv: Option<PathBuf>,
    pub vtu_dir: Option<PathBuf>,
    /// Worker threads for indicator evaluation.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "quadratic".into(),
            degree: 3,
            mesh: MeshSource::Builtin(4),
            newton: NewtonOptions::default(),
            estimator: EstimatorOptions::default(),
            theta: 0.5,
            stop: StopCriteria::default(),
            study_levels: 3,
            csv: None,
            vtu_dir: None,
            threads: 1,
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::Config(format!("{key} = {value}: expected {what}"))
}

fn uint(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| bad(key, v, "a non-negative integer"))
}

fn real(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| bad(key, v, "a number"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let (mut mesh_n, mut mesh_file) = (None, None);
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected 'key = value', found '{line}'", i + 1)));
            };
            let (key, v) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", i + 1)));
            }
            match key {
                "threads" => c.threads = uint(key, v)?,
                "problem.name" => c.problem = v.to_string(),
                "discretization.degree" => c.degree = uint(key, v)?,
                "mesh.n" => mesh_n = Some(uint(key, v)?),
                "mesh.file" => mesh_file = Some(PathBuf::from(v)),
                "newton.tol" => c.newton.tol_residual = real(key, v)?,
                "newton.max_iters" => c.newton.max_iters = uint(key, v)?,
                "newton.damping" => {
                    c.newton.damping = match v {
                        "none" => Damping::None,
                        "backtracking" => Damping::Backtracking,
                        _ => return Err(bad(key, v, "'none' or 'backtracking'")),
                    }
                }
                "newton.linear_tol" => c.newton.linear_tol = real(key, v)?,
                "estimator.cofactor_source" => {
                    c.estimator.cofactor_source = match v {
                        "hessian" => CofactorSource::Hessian,
                        "sigma" => CofactorSource::Sigma,
                        _ => return Err(bad(key, v, "'hessian' or 'sigma'")),
                    }
                }
                "estimator.quadrature_bump" => c.estimator.quadrature_bump = uint(key, v)?,
                "adapt.theta" => c.theta = real(key, v)?,
                "adapt.max_levels" => c.stop.max_levels = uint(key, v)?,
                "adapt.max_cells" => c.stop.max_cells = if v == "none" { None } else { Some(uint(key, v)?) },
                "adapt.theta_tol" => c.stop.theta_tol = real(key, v)?,
                "study.levels" => c.study_levels = uint(key, v)?,
                "output.csv" => c.csv = Some(PathBuf::from(v)),
                "output.vtu_dir" => c.vtu_dir = Some(PathBuf::from(v)),
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}'", i + 1))),
            }
        }
        c.mesh = match (mesh_n, mesh_file) {
            (Some(_), Some(_)) => return Err(Error::Config("mesh.n and mesh.file are mutually exclusive".into())),
            (Some(n), None) => MeshSource::Builtin(n),
            (None, Some(p)) => MeshSource::File(p),
            (None, None) => c.mesh,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 3 {
            return Err(Error::Config(format!("degree k must be >= 3, got {}", self.degree)));
        }
        if !BUILTIN_PROBLEMS.contains(&self.problem.as_str()) {
            return Err(Error::Config(format!(
                "unknown problem '{}' (available: {})",
                self.problem,
                BUILTIN_PROBLEMS.join(", ")
            )));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!("adapt.theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.mesh == MeshSource::Builtin(0) {
            return Err(Error::Config("mesh.n must be >= 1".into()));
        }
        if self.stop.max_levels == 0 || self.study_levels == 0 {
            return Err(Error::Config("adapt.max_levels and study.levels must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        self.newton.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn settings(&self) -> Settings {
        Settings { newton: self.newton, estimator: self.estimator }
    }

    /// Canonical text form listing every key.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("threads", self.threads.to_string());
        kv("problem.name", self.problem.clone());
        kv("discretization.degree", self.degree.to_string());
        match &self.mesh {
            MeshSource::Builtin(n) => kv("mesh.n", n.to_string()),
            MeshSource::File(p) => kv("mesh.file", p.display().to_string()),
        }
        kv("newton.tol", format!("{:?}", self.newton.tol_residual));
        kv("newton.max_iters", self.newton.max_iters.to_string());
        let damping = match self.newton.damping {
            Damping::None => "none",
            Damping::Backtracking => "backtracking",
        };
        kv("newton.damping", damping.into());
        kv("newton.linear_tol", format!("{:?}", self.newton.linear_tol));
        let source = match self.estimator.cofactor_source {
            CofactorSource::Hessian => "hessian",
            CofactorSource::Sigma => "sigma",
        };
        kv("estimator.cofactor_source", source.into());
        kv("estimator.quadrature_bump", self.estimator.quadrature_bump.to_string());
        kv("adapt.theta", format!("{:?}", self.theta));
        kv("adapt.max_levels", self.stop.max_levels.to_string());
        kv("adapt.max_cells", self.stop.max_cells.map_or("none".into(), |n| n.to_string()));
        kv("adapt.theta_tol", format!("{:?}", self.stop.theta_tol));
        kv("study.levels", self.study_levels.to_string());
        if let Some(p) = &self.csv {
            kv("output.csv", p.display().to_string());
        }
        if let Some(p) = &self.vtu_dir {
            kv("output.vtu_dir", p.display().to_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn inline_comments_and_whitespace() {
        let c = RunConfig::parse("  problem.name=ball   # the ball\nmesh.n = 2\n").unwrap();
        assert_eq!(c.problem, "ball");
        assert_eq!(c.mesh, MeshSource::Builtin(2));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(RunConfig::parse("mesh.size = 3").is_err());
        assert!(RunConfig::parse("mesh.n = 3\nmesh.n = 4").is_err());
        assert!(RunConfig::parse("mesh.n = 3\nmesh.file = a.mesh").is_err());
        assert!(RunConfig::parse("newton.damping = wild").is_err());
        assert!(RunConfig::parse("just text").is_err());
    }
}
