//! The second-order operator `Q` whose kernel contains the support functions.

use num_complex::Complex64;

use crate::chart::fd::{diff_u, diff_uu, diff_v, diff_vv};
use crate::chart::grid::{ComplexField, ScalarField};
use crate::error::Result;
use crate::gaussmap::ChartGeometry;

/// `theta_uv - Gamma^u theta_u - Gamma^v theta_v + F theta` with
/// finite-difference partials.
pub fn q_apply(geom: &ChartGeometry, theta: &ScalarField) -> Result<ScalarField> {
    theta.same_grid(&geom.e, "theta")?;
    let dv = diff_v(theta)?;
    Ok(q_apply_with(geom, theta, &diff_u(theta)?, &dv, &diff_u(&dv)?))
}

/// `Q(theta)` from caller-supplied partials.
pub fn q_apply_with(
    geom: &ChartGeometry,
    theta: &ScalarField,
    du: &ScalarField,
    dv: &ScalarField,
    duv: &ScalarField,
) -> ScalarField {
    let (gu, gv, f) = (geom.gamma_u(), geom.gamma_v(), &geom.f);
    ScalarField::from_nodes(geom.grid, |i, j| {
        duv.at(i, j) - gu.at(i, j) * du.at(i, j) - gv.at(i, j) * dv.at(i, j)
            + f.at(i, j) * theta.at(i, j)
    })
}

/// `theta_zzbar - Gamma theta_z - conj(Gamma) theta_zbar + F theta` with
/// `d_z = (d_u - i d_v) / 2`.
pub fn q_apply_complex(geom: &ChartGeometry, theta: &ComplexField) -> Result<ComplexField> {
    theta.same_grid(&geom.e, "theta")?;
    let du = diff_u(theta)?;
    let dv = diff_v(theta)?;
    let lap = diff_uu(theta)?.zip_map(&diff_vv(theta)?, |a, b| (a + b) * 0.25);
    let i = Complex64::i();
    Ok(ComplexField::from_nodes(geom.grid, |a, b| {
        let (tu, tv) = (du.at(a, b), dv.at(a, b));
        let tz = (tu - i * tv) * 0.5;
        let tzb = (tu + i * tv) * 0.5;
        let g = geom.gamma_c.at(a, b);
        lap.at(a, b) - g * tz - g.conj() * tzb + theta.at(a, b) * geom.f_c.at(a, b)
    }))
}

/// Complex `Q` of a real field; the result is real.
pub fn q_apply_elliptic(geom: &ChartGeometry, theta: &ScalarField) -> Result<ScalarField> {
    let c = theta.map(|x| Complex64::new(*x, 0.0));
    Ok(q_apply_complex(geom, &c)?.re())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::Grid2;
    use crate::gaussmap::{build_geometry, clifford_torus};

    fn flat(n: usize) -> ChartGeometry {
        let g = Grid2::square(0.0, 1.0, n).unwrap();
        let z = ScalarField::zeros(g);
        ChartGeometry::with_hyperbolic_coefficients(z.clone(), z.clone(), z).unwrap()
    }

    #[test]
    fn constants_are_in_the_flat_kernel() {
        let geom = flat(12);
        let q = q_apply(&geom, &ScalarField::filled(geom.grid, 3.5)).unwrap();
        assert!(q.data.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn clifford_product_of_sines() {
        let mut errs = Vec::new();
        for n in [33, 65] {
            let g = Grid2::square(0.0, 1.0, n).unwrap();
            let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
            let theta = ScalarField::from_fn(g, |u, v| u.sin() * v.sin());
            let q = q_apply(&geom, &theta).unwrap();
            let want = ScalarField::from_fn(g, |u, v| u.cos() * v.cos());
            errs.push(q.sub(&want).max_abs(0).value);
        }
        assert!(errs[0] < 1e-3 && errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn complex_operator_on_harmonic_data() {
        let g = Grid2::square(-0.5, 0.5, 21).unwrap();
        let zero = ComplexField::filled(g, Complex64::new(0.0, 0.0));
        let geom = ChartGeometry::with_elliptic_coefficients(zero, ScalarField::zeros(g)).unwrap();
        // Re(z^2) = u^2 - v^2 is harmonic; the stencils are exact on quadratics.
        let q = q_apply_elliptic(&geom, &ScalarField::from_fn(g, |u, v| u * u - v * v)).unwrap();
        assert!(q.max_abs(0).value < 1e-10);
        let q = q_apply_elliptic(&geom, &ScalarField::from_fn(g, |u, v| u * u + v * v)).unwrap();
        assert!((q.data[50] - 1.0).abs() < 1e-10);
    }
}
