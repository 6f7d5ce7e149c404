//! Projective structures on charted manifolds with boundary.
//!
//! The crate represents torsion-free affine connections symbolically, works
//! with their projective classes (shifts by a 1-form, Thomas parameters,
//! projective transformations), builds the normal Cartan gauge and its
//! restriction to the boundary, and decides whether the boundary is rigid:
//! whether a projective transformation fixing the boundary must be the
//! identity.

pub mod cartan;
pub mod commands;
pub mod curvature;
pub mod fixtures;
pub mod geodesic;
pub mod geometry;
pub mod report;
pub mod rigidity;
pub mod sample;
pub mod symexpr;

pub use sample::Sampler;
pub use symexpr::{Expr, ZeroVerdict};
