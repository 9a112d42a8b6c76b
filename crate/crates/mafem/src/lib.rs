//! File formats, configuration, threading and the command-line driver for
//! the `mafem-core` Monge–Ampère solver.

pub mod cli;
pub mod config;
pub mod csv;
pub mod error;
pub mod mesh_io;
pub mod parallel;
pub mod vtu;

pub use error::{Error, Result};
