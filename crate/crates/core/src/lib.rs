//! Numerical verification engine for a Born-Infeld type action built from
//! Dirac matrices and dimensionless covariant derivatives.
//!
//! Every object of the construction (Clifford generators from a tetrad,
//! spin and electroweak connections, curvature, the quartic determinant-like
//! densities and their ℓ-expansions, the hyperbolic `(γ, π)` rotation and the
//! physical-constant formulas) is implemented concretely and checked against
//! independent routes at seeded probe points.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]


pub mod cli;
pub mod clifford;
pub mod config;
pub mod constants;
pub mod error;
pub mod gauge;
pub mod geometry;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod lseries;
pub mod polyfield;
pub mod probe;
pub mod report;
pub mod residual;
pub mod suite;
pub mod theta;

pub use error::{Error, Result};
