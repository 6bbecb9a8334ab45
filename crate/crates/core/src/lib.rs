//! Chebyshev-type polynomials on systems of continua.
//!
//! The crate discretizes the equilibrium measure of a compact set made of
//! finitely many disjoint continua, traces Green level curves, builds the
//! Totik-type monic polynomials whose roots are equal-measure centroids on
//! those curves, and compares them with reference minimax polynomials.

pub mod analysis;
pub mod check;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod geometry;
pub mod minimax;
pub mod partition;
pub mod polynomials;
pub mod potential;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
