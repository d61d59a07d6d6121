//! Saddle-shaped solutions of -Δu = f(u) in R^2m = R^m x R^m, reduced to the
//! variables s = |x1|, t = |x2|: 1D heteroclinic profiles, monotone iteration
//! for the maximal and minimal solutions on T_R = {t < s < R}, diagnostics, and
//! the second variation along the Simons cone.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod linsolve;
pub mod nonlinearity;
pub mod operator;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
