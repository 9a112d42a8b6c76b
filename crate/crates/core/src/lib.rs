//! Mixed finite element discretization of the two-dimensional Monge–Ampère
//! equation `det D²u = f` with a residual a posteriori error estimator and
//! an adaptive solve/estimate/mark/refine loop.
//!
//! The Hessian `σ = D²u` is an independent continuous piecewise polynomial
//! unknown, reconstructed from `u` through an integration-by-parts identity,
//! and the determinant equation is solved by damped Newton iteration.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the command
//! line front end and threading live in the `mafem` companion crate.
#![no_std]

extern crate alloc;

pub mod adapt;
pub mod assembly;
pub mod error;
pub mod estimator;
pub mod lagrange;
pub mod math;
pub mod mesh;
pub mod newton;
pub mod problems;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
