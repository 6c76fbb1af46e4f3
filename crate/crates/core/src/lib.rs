//! Jet-bundle geometry for first-order PDE systems `x^i_α = X^i_α(t, x)`.
//!
//! A system is given by Riemannian metrics `h` on the parameter space T,
//! `φ` on the target M and the field `X`. The crate evaluates the geometric
//! objects attached to such a system (covariant derivatives, sprays,
//! nonlinear connections, torsion, the electromagnetic 2-form, Einstein data)
//! and solves the system by minimizing the least-squares energy
//! `∫ ‖dx − X‖² √h dt` over maps discretized on a grid.

// `!(a < b)` is deliberate: NaN has to fail the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod jetgeom;
pub mod expr;
pub mod fieldtheory;
pub mod linalg;
pub mod lsqsolve;
pub mod riemann;
pub mod rng;
pub mod scenarios;
pub mod signs;

pub use error::{Error, Result};
