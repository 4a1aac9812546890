//! Reconstruction of `f` from `(h, gamma)`, of its deformation `g` from a
//! triple, and the isometry certificate between them.

pub mod export;
pub mod fside;
pub mod gside;
pub mod isometry;
pub mod sample;

pub use export::{write_obj_slice, write_sample_csv};
pub use fside::{gauss_param_f, shape_cross_check, FSample, ShapeCrossCheck};
pub use gside::{
    default_frame_tol, frame_integrate_g, plaquette_holonomy, second_form_from, second_form_g,
    GIntegration, GSecondForm, PathOrder,
};
pub use isometry::{check3, first_normal_ratio, isometry_check, metric_deviation};
pub use sample::{pad, rigid_fit, ImmersionSample, MaxAt3, RigidFit};
