//! Gravitational 3-body problem on the unit 3-sphere and the unit hyperbolic 3-sphere.
//!
//! The crate provides the equations of motion and their first integrals, a
//! projected fixed-step integrator, closed-form Lagrangian relative equilibria
//! (rigidly rotating equilateral triangles) and numerical checks that such
//! equilibria only exist for equal masses.

// NaN must fail validation, hence `!(x > 0.0)`; per-body index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod equilibria;
pub mod geometry;
pub mod integrator;
pub mod simplex;
pub mod verification;

pub use dynamics::{DynamicsError, InvariantRecord, State};
pub use geometry::{Curvature, Vec4};
