//! Isogeometric analysis on polar domains with a corner: graded mesh
//! refinement towards the collapsed edge, the continuous polar spline space
//! with its projector, a Galerkin Poisson solver and convergence studies.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod nurbs;
mod parallel;
pub mod polar_space;
pub mod quadrature;
pub mod solver;
pub mod splines;

pub use error::{Error, Result};
