//! The Gauss-image surface: patches, catalog, geometry and conjugacy type.

pub mod catalog;
pub mod classify;
pub mod geometry;
pub mod patch;

pub use catalog::{catalog, clifford_torus, rotational_isothermic, RadiusProfile, SurfaceSpec};
pub use classify::{classify, commutation_residual, ConjugacyKind, ConjugacyStructure};
pub use geometry::{build_geometry, ChartGeometry, Christoffel};
pub use patch::{Jet, SurfacePatch};
