//! Secular stability of planar equilibria in the doubly averaged restricted
//! elliptic three-body problem.
//!
//! The crate computes the doubly averaged force function of the planet and
//! the coefficients of its quadratic part in the out-of-plane Poincaré
//! variables, locates the aligned equilibria of the planar averaged problem,
//! classifies their linear stability against spatial perturbations, and maps
//! all of this over the `(a, e_J)` parameter plane.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod equilibrium;
pub mod error;
pub mod fd;
pub mod kepler;
pub mod oracle;
pub mod quadrature;
pub mod stability;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
