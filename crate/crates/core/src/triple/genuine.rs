//! Genuineness margins and the composition frame of a triple.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::field::{TripleField, TripleKind};
use crate::chart::grid::{MaxAt, ScalarField};
use crate::report::{Check, CheckSet};

/// Genuineness margins and the rank margin of `D1^2 + D2^2 - I`.
#[derive(Debug, Clone)]
pub struct Genuineness {
    pub genuine: bool,
    pub margin: MaxAt,
    pub rank_margin: MaxAt,
    pub checks: CheckSet,
}

/// A triple is genuine when it is not a reparametrised trivial deformation:
/// for the hyperbolic kind neither `tau1 + tau2 = 2` nor
/// `1/tau1 + 1/tau2 = 2` holds, for the elliptic kind `alpha != 2`.
pub fn genuineness(t: &TripleField, tol: f64) -> Genuineness {
    let d = &t.diag;
    let margin_field = match t.kind {
        TripleKind::Hyperbolic => d.tau1.zip_map(&d.tau2, |a, b| {
            let m1 = (a + b - 2.0).norm();
            let m2 = (a.inv() + b.inv() - 2.0).norm();
            m1.min(m2)
        }),
        TripleKind::Elliptic => d.alpha.map(|a| (a - 2.0).norm()),
    };
    let margin = margin_field.min_by(0, |x| *x);
    let rank = t.d1.zip_map(&t.d2, |a, b| {
        let m = (a * a + b * b - Matrix2::identity()) * 2.0;
        m.singular_values().min()
    });
    let rank_margin = rank.min_by(0, |x| *x);
    let mut checks = CheckSet::default();
    checks.insert("genuine", Check::margin(margin, tol));
    checks.insert("rank", Check::margin(rank_margin, tol));
    Genuineness { genuine: checks.pass(), margin, rank_margin, checks }
}

/// Coefficients with `a1 D1 + a2 D2 = I`.
#[derive(Debug, Clone)]
pub struct CompositionFrame {
    pub a1: ScalarField,
    pub a2: ScalarField,
    /// `atan2(a2, a1)`.
    pub angle: ScalarField,
    /// `max |a1 D1 + a2 D2 - I|`.
    pub identity_residual: MaxAt,
    /// `max |a1^2 + a2^2 - 1|`.
    pub unit_residual: MaxAt,
}

fn coefficient(ti: Complex64, tj: Complex64) -> Complex64 {
    let (si, sj) = (ti * ti, tj * tj);
    ti * 2.0_f64.sqrt() * (1.0 - sj) / (si - sj)
}

/// Hyperbolic triples only; `None` for the elliptic kind.
pub fn composition_frame(t: &TripleField) -> Option<CompositionFrame> {
    if t.kind != TripleKind::Hyperbolic {
        return None;
    }
    let d = &t.diag;
    let a1 = d.theta1.zip_map(&d.theta2, |&x, &y| coefficient(x, y).re);
    let a2 = d.theta2.zip_map(&d.theta1, |&x, &y| coefficient(x, y).re);
    let angle = a1.zip_map(&a2, |x, y| y.atan2(*x));
    let resid = crate::chart::grid::Field::from_nodes(t.grid, |i, j| {
        let k = t.grid.idx(i, j);
        (t.d1.at(i, j) * a1.data[k] + t.d2.at(i, j) * a2.data[k] - Matrix2::identity()).norm()
    });
    let unit = a1.zip_map(&a2, |x, y| (x * x + y * y - 1.0).abs());
    Some(CompositionFrame {
        identity_residual: resid.max_abs(0),
        unit_residual: unit.max_abs(0),
        a1,
        a2,
        angle,
    })
}
