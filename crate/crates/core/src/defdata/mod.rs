//! The operator `Q`, deformation data and support functions.

pub mod datum;
pub mod profile;
pub mod q;
pub mod support;

pub use datum::{
    build_pair, build_zeta, ch_membership, default_membership_tol, example_family, Branch,
    DeformationDatum, EllipticDatum, HyperbolicDatum, MembershipReport,
};
pub use profile::Profile;
pub use q::{q_apply, q_apply_complex, q_apply_elliptic, q_apply_with};
pub use support::{support_check, support_solve, warped_support, SupportCheck, SupportFunction};
