//! Gravitational n-body problem on two-dimensional spaces of constant
//! curvature κ ≠ 0.
//!
//! Bodies live on the sphere `x² + y² + z² = 1/κ` (κ > 0) or on the upper
//! sheet of the hyperboloid `x² + y² − z² = 1/κ` (κ < 0, Weierstrass model)
//! and interact through the cotangent potential. The crate provides the
//! equations of motion in ambient coordinates, a projection-stabilised
//! adaptive integrator with singularity events, constructors and checks for
//! fixed points and relative equilibria, and conservation diagnostics.
//!
//! Data-parallel work (root scans, batches of runs, force sums for large n)
//! goes through [`par`], which uses rayon when the `parallel` feature is on
//! and plain iterators otherwise.

// Domain guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod par;
pub mod singularities;

pub use error::{Error, Result};
pub use geometry::{Curvature, Isometry, SurfacePoint, TangentVector, Vec3};
pub use dynamics::{Body, FirstIntegrals, SystemState};
