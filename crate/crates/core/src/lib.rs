//! Exact and certified computations for Runge's method on modular curves.
//!
//! The crate is layered bottom-up:
//!
//! * [`modnt`]: residue matrices and enumerated subgroups of GL_2(Z/NZ).
//! * [`cusps`]: cusps of X_G, widths, rational orbits, place constants.
//! * [`units`]: divisors of Siegel units and their traces, the divisor
//!   matrix and the Runge unit.
//! * [`ball`] and [`analytic`]: ball arithmetic, evaluation of `j` and
//!   Siegel functions, and certified checks of the archimedean estimates.
//! * [`bounds`]: the explicit height bounds and the isogeny-level checker.

pub mod analytic;
pub mod arith;
pub mod ball;
pub mod bounds;
pub mod cusps;
pub mod error;
pub mod linalg;
pub mod modnt;
pub mod par;
pub mod selftest;
pub mod units;

pub use error::{Error, Result};
