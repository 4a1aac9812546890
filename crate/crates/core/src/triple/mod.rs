//! Triples `(D1, D2, phi)` built from deformation data.

pub mod field;
pub mod genuine;
pub mod verify;

pub use field::{
    elliptic_roots, hyperbolic_roots, triple_from_pair, triple_from_zeta, TripleDiagnostics,
    TripleField, TripleKind,
};
pub use genuine::{composition_frame, genuineness, CompositionFrame, Genuineness};
pub use verify::{default_triple_tol, verify_triple, ALGEBRA_TOL};
