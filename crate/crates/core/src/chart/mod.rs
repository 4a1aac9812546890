//! Grids, finite-difference calculus, quadrature and the Goursat solver.

pub mod fd;
pub mod goursat;
pub mod grid;
pub mod io;

pub use fd::{cumint, diff_u, diff_uu, diff_uv, diff_v, diff_vv, partials, Axis, Partials};
pub use goursat::solve_goursat;
pub use grid::{
    ComplexField, ComplexMatrix2Field, Field, Grid2, Grid3, Matrix2Field, MaxAt, ScalarField,
    VectorField, DEFAULT_BAND,
};
