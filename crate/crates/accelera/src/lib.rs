//! Reachability analysis for guarded linear loops with bounded
//! non-deterministic inputs.
//!
//! The analyzer computes sound over-approximations of bounded- and
//! unbounded-time reach tubes for loops of the form
//! `while (G x <= h) { x := A x + B u; u in U }` by abstract acceleration:
//! a numerical Jordan decomposition with a certified residual, polyhedral
//! abstract matrices enclosing all powers of the loop body, and
//! support-function evaluation of the resulting set expressions. All
//! scalar arithmetic that touches a reported bound is interval-rounded.
//!
//! A bounded-horizon LGG-style propagation is included as a baseline for
//! precision/runtime comparisons.

pub mod abstraction;
pub mod acceleration;
pub mod error;
pub mod geometry;
pub mod lgg;
pub mod linalg;
pub mod model_io;
pub mod numerics;

pub use error::{Error, Result};
