//! Reduced quadrilateral Morley (RQM) finite elements for the clamped
//! biharmonic equation on convex quadrilateral meshes.
//!
//! The discrete space is piecewise quadratic: vertex values are continuous
//! and zero on the boundary, and edge averages of the normal derivative are
//! continuous across interior edges and zero on boundary edges. The library
//! realizes it inside the quadrilateral Wilson space as the kernel of an
//! edge-jump constraint matrix and solves the plate problem either through a
//! regularized saddle-point system (any convex quad mesh) or through a swept
//! basis of 3x3-patch functions (rectangular meshes).

pub mod error;
pub mod geometry;
pub mod poly;
pub mod quadrature;
pub mod mesh;
pub mod elements;

pub use error::{Error, Result};
