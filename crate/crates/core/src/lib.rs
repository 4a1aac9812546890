//! Rank-two Euclidean hypersurfaces from Gauss-parametrization data and their
//! genuine isometric deformations in codimension two.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod defdata;
pub mod error;
pub mod gaussmap;
pub mod pipeline;
pub mod reconstruct;
pub mod report;
pub mod triple;

pub use error::{Error, Result};
