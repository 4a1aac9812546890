//! Residuals of the structure equations a triple must satisfy.

use nalgebra::{Matrix2, Vector2};

use super::field::TripleField;
use crate::chart::fd::{diff_u, diff_v};
use crate::chart::grid::{Matrix2Field, ScalarField, DEFAULT_BAND};
use crate::defdata::SupportFunction;
use crate::error::Result;
use crate::gaussmap::classify::commutation_residual;
use crate::gaussmap::ChartGeometry;
use crate::report::{Check, CheckSet};

/// Tolerance for the pointwise algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// `100 (hu^2 + hv^2)` times the field scale of the triple.
pub fn default_triple_tol(triple: &TripleField) -> f64 {
    100.0 * triple.grid.h2() * triple_scale(triple)
}

/// `max(1, |theta_i|, 1/|theta_i|)` over the chart.
pub fn triple_scale(triple: &TripleField) -> f64 {
    let mut s = 1.0_f64;
    for th in [&triple.diag.theta1, &triple.diag.theta2] {
        for t in &th.data {
            s = s.max(t.norm()).max(1.0 / t.norm());
        }
    }
    s
}

/// `|D - aI - bJ|` for the least-squares coefficients `a, b`.
fn span_defect(d: &Matrix2<f64>, j: &Matrix2<f64>) -> f64 {
    let i = Matrix2::identity();
    let gram = Matrix2::new(i.dot(&i), i.dot(j), j.dot(&i), j.dot(j));
    let rhs = Vector2::new(i.dot(d), j.dot(d));
    let c = gram.try_inverse().map(|g| g * rhs).unwrap_or_else(Vector2::zeros);
    (d - i * c[0] - j * c[1]).norm()
}

/// Coordinate components of
/// `nabla_u (D d_v) - nabla_v (D d_u) - s (phi_u D' d_v - phi_v D' d_u)`.
pub fn codazzi_residual(
    geom: &ChartGeometry,
    d: &Matrix2Field,
    other: &Matrix2Field,
    phi_u: &ScalarField,
    phi_v: &ScalarField,
    sign: f64,
) -> Result<ScalarField> {
    let entry = |r: usize, c: usize| d.map(|m| m[(r, c)]);
    // Columns of D are D d_u and D d_v.
    let dv_comp = [entry(0, 1), entry(1, 1)];
    let du_comp = [entry(0, 0), entry(1, 0)];
    let dv_u = [diff_u(&dv_comp[0])?, diff_u(&dv_comp[1])?];
    let du_v = [diff_v(&du_comp[0])?, diff_v(&du_comp[1])?];
    let c = &geom.christoffel;
    Ok(ScalarField::from_nodes(geom.grid, |i, j| {
        let m = d.at(i, j);
        let o = other.at(i, j);
        let (pu, pv) = (*phi_u.at(i, j), *phi_v.at(i, j));
        let mut worst = 0.0_f64;
        for k in 0..2 {
            let nabla_u = dv_u[k].at(i, j) + c.uu[k].at(i, j) * m[(0, 1)] + c.uv[k].at(i, j) * m[(1, 1)];
            let nabla_v = du_v[k].at(i, j) + c.uv[k].at(i, j) * m[(0, 0)] + c.vv[k].at(i, j) * m[(1, 0)];
            let rhs = sign * (pu * o[(k, 1)] - pv * o[(k, 0)]);
            worst = worst.max((nabla_u - nabla_v - rhs).abs());
        }
        worst
    }))
}

/// `d phi(d_u, d_v) - (<D1 d_u, D2 d_v> - <D2 d_u, D1 d_v>)`.
pub fn curvature_residual(geom: &ChartGeometry, t: &TripleField) -> Result<ScalarField> {
    let dphi = diff_u(&t.phi_v)?.sub(&diff_v(&t.phi_u)?);
    Ok(ScalarField::from_nodes(geom.grid, |i, j| {
        let g = geom.metric_at(i, j);
        let (a, b) = (t.d1.at(i, j), t.d2.at(i, j));
        let pair = |x: &Matrix2<f64>, y: &Matrix2<f64>| (x.column(0).transpose() * g * y.column(1))[0];
        (dphi.at(i, j) - (pair(a, b) - pair(b, a))).abs()
    }))
}

/// Residuals of the determinant, span, transport, curvature and Hessian
/// identities, and the margins of the non-degeneracy condition.
pub fn verify_triple(
    geom: &ChartGeometry,
    t: &TripleField,
    gamma: &SupportFunction,
    tol: Option<f64>,
) -> Result<CheckSet> {
    let tol = tol.unwrap_or_else(|| default_triple_tol(t));
    let jb = t.kind.j_bar();
    let mut out = CheckSet::default();

    let det = t
        .d1
        .zip_map(&t.d2, |a, b| (a.determinant() - 0.5).abs().max((b.determinant() - 0.5).abs()));
    out.insert("a_det", Check::residual(det.max_abs(0), ALGEBRA_TOL));
    let span = t.d1.zip_map(&t.d2, |a, b| span_defect(a, &jb).max(span_defect(b, &jb)));
    out.insert("a_span", Check::residual(span.max_abs(0), ALGEBRA_TOL));

    let b1 = codazzi_residual(geom, &t.d1, &t.d2, &t.phi_u, &t.phi_v, 1.0)?;
    let b2 = codazzi_residual(geom, &t.d2, &t.d1, &t.phi_u, &t.phi_v, -1.0)?;
    out.insert("b_1", Check::residual(b1.max_abs(DEFAULT_BAND), tol));
    out.insert("b_2", Check::residual(b2.max_abs(DEFAULT_BAND), tol));

    let c = curvature_residual(geom, t)?;
    out.insert("c", Check::residual(c.max_abs(DEFAULT_BAND), tol));

    let sq = t.d1.zip_map(&t.d2, |a, b| (a * a, b * b));
    let minus = sq.min_by(0, |(a, b)| (b - a).norm());
    let plus = sq.min_by(0, |(a, b)| (b + a).norm());
    out.insert("d_minus", Check::margin(minus, tol));
    out.insert("d_plus", Check::margin(plus, tol));

    let jfield = Matrix2Field::filled(geom.grid, jb);
    let seven = commutation_residual(geom, &gamma.hess, &gamma.gamma, &jfield);
    out.insert("eq7", Check::residual(seven.max_abs(DEFAULT_BAND), tol));

    out.insert("transport_i2", Check::residual(t.consistency.max_abs(DEFAULT_BAND), tol));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::Grid2;
    use crate::defdata::{build_pair, warped_support};
    use crate::gaussmap::{build_geometry, clifford_torus};
    use crate::triple::triple_from_pair;

    fn clifford_setup() -> (ChartGeometry, TripleField, SupportFunction) {
        let g = Grid2::square(0.0, 1.0, 16).unwrap();
        let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
        let d = build_pair(&geom, &[0.5; 16], &[0.5; 16]).unwrap();
        let t = triple_from_pair(&geom, &d).unwrap();
        let nu: Vec<f64> = (0..16).map(|j| 1.0 + 0.2 * g.v(j).sin()).collect();
        let s = warped_support(&geom, &nu).unwrap();
        (geom, t, s)
    }

    #[test]
    fn clifford_instance_has_vanishing_residuals() {
        let (geom, t, s) = clifford_setup();
        let r = verify_triple(&geom, &t, &s, None).unwrap();
        assert!(r.pass(), "{r:?}");
        for name in ["a_det", "b_1", "b_2", "c", "transport_i2"] {
            assert!(r.get(name).unwrap().max_residual < 1e-14, "{name}");
        }
    }

    #[test]
    fn corrupted_one_form_fails_codazzi() {
        let (geom, mut t, s) = clifford_setup();
        t.phi_u = t.phi_u.map(|x| x + 0.1);
        let r = verify_triple(&geom, &t, &s, Some(1e-6)).unwrap();
        let b1 = r.get("b_1").unwrap();
        // 0.1 times the d_v component of D2 d_v = 1 / (sqrt 2 theta_2).
        let want = 0.1 / (2.0_f64.sqrt() * t.diag.theta2.data[0].re);
        assert!(!b1.pass && (b1.max_residual - want).abs() < 1e-12);
    }

    #[test]
    fn swapping_keeps_verdicts() {
        let (geom, t, s) = clifford_setup();
        let a = verify_triple(&geom, &t, &s, None).unwrap();
        let b = verify_triple(&geom, &t.swapped(), &s, None).unwrap();
        for (k, c) in &a.0 {
            assert_eq!(c.pass, b.get(k).unwrap().pass, "{k}");
        }
    }
}
