//! Characteristic Goursat problem for
//! `theta_uv - Gu theta_u - Gv theta_v + F theta = 0`
//! with data on the lines `v = v0` and `u = u0`.

use super::grid::{Grid2, ScalarField};
use crate::error::{Error, Result};

/// Relative tolerance for `a(u0) == b(v0)`.
pub const CORNER_TOL: f64 = 1e-10;

/// Corrector sweeps per cell after the predictor.
const CORRECTOR_PASSES: usize = 2;

pub fn solve_goursat(
    gamma_u: &ScalarField,
    gamma_v: &ScalarField,
    f: &ScalarField,
    a: &[f64],
    b: &[f64],
    grid: Grid2,
) -> Result<ScalarField> {
    for (name, c) in [("Gamma^u", gamma_u), ("Gamma^v", gamma_v), ("F", f)] {
        if c.grid != grid {
            return Err(Error::ShapeMismatch(format!("{name} is on another grid")));
        }
        c.check_finite(name)?;
    }
    if a.len() != grid.nu || b.len() != grid.nv {
        return Err(Error::ShapeMismatch(format!(
            "boundary data lengths {}/{} for a {}x{} grid",
            a.len(),
            b.len(),
            grid.nu,
            grid.nv
        )));
    }
    let scale = 1.0_f64.max(a[0].abs()).max(b[0].abs());
    if (a[0] - b[0]).abs() > CORNER_TOL * scale {
        return Err(Error::CornerMismatch { a: a[0], b: b[0] });
    }

    let (hu, hv) = (grid.hu, grid.hv);
    let mut theta = ScalarField::zeros(grid);
    for (i, x) in a.iter().enumerate() {
        *theta.at_mut(i, 0) = *x;
    }
    for (j, x) in b.iter().enumerate().skip(1) {
        *theta.at_mut(0, j) = *x;
    }

    let avg = |c: &ScalarField, i: usize, j: usize| {
        0.25 * (c.at(i, j) + c.at(i + 1, j) + c.at(i, j + 1) + c.at(i + 1, j + 1))
    };

    // Cells are visited in storage order, which respects the causal order.
    for i in 0..grid.nu - 1 {
        for j in 0..grid.nv - 1 {
            let t00 = *theta.at(i, j);
            let t10 = *theta.at(i + 1, j);
            let t01 = *theta.at(i, j + 1);
            let gu = avg(gamma_u, i, j);
            let gv = avg(gamma_v, i, j);
            let fc = avg(f, i, j);
            let mut t11 = t10 + t01 - t00;
            for _ in 0..CORRECTOR_PASSES {
                let tu = 0.5 * ((t10 - t00) + (t11 - t01)) / hu;
                let tv = 0.5 * ((t01 - t00) + (t11 - t10)) / hv;
                let tc = 0.25 * (t00 + t10 + t01 + t11);
                t11 = t10 + t01 - t00 + hu * hv * (gu * tu + gv * tv - fc * tc);
            }
            if !t11.is_finite() {
                return Err(Error::NonFinite {
                    what: "Goursat solution".into(),
                    node: (i + 1, j + 1),
                });
            }
            *theta.at_mut(i + 1, j + 1) = t11;
        }
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::fd::{diff_u, diff_uv, diff_v};

    #[test]
    fn wave_equation_with_additive_data() {
        let g = Grid2::new(0.5, 1.5, 17, -0.25, 0.75, 13).unwrap();
        let z = ScalarField::zeros(g);
        let a: Vec<f64> = (0..g.nu).map(|i| g.u(i) - g.u0).collect();
        let b: Vec<f64> = (0..g.nv).map(|j| g.v(j) - g.v0).collect();
        let th = solve_goursat(&z, &z, &z, &a, &b, g).unwrap();
        for i in 0..g.nu {
            for j in 0..g.nv {
                let want = g.u(i) + g.v(j) - g.u0 - g.v0;
                assert!((th.at(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_lambda_reduction_keeps_constant_data() {
        let g = Grid2::square(0.0, 1.0, 16).unwrap();
        let z = ScalarField::zeros(g);
        let th = solve_goursat(&z, &z, &z, &vec![1.0; g.nu], &vec![1.0; g.nv], g).unwrap();
        assert!(th.data.iter().all(|x| *x == 1.0));
    }

    #[test]
    fn corner_incompatibility_is_rejected() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let z = ScalarField::zeros(g);
        let mut b = vec![0.0; g.nv];
        b[0] = 1e-6;
        assert!(matches!(
            solve_goursat(&z, &z, &z, &vec![0.0; g.nu], &b, g),
            Err(Error::CornerMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_coefficients_are_rejected() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let z = ScalarField::zeros(g);
        let mut bad = z.clone();
        *bad.at_mut(2, 3) = f64::INFINITY;
        assert!(matches!(
            solve_goursat(&bad, &z, &z, &vec![0.0; g.nu], &vec![0.0; g.nv], g),
            Err(Error::NonFinite { node: (2, 3), .. })
        ));
    }

    #[test]
    fn residual_of_solution_is_second_order() {
        let mut res = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid2::square(0.0, 1.0, n).unwrap();
            let gu = ScalarField::from_fn(g, |u, v| 0.3 * (u + v).sin());
            let gv = ScalarField::from_fn(g, |u, _| 0.2 * u);
            let f = ScalarField::from_fn(g, |_, v| 0.5 + 0.1 * v);
            let a: Vec<f64> = (0..g.nu).map(|i| 1.0 + g.u(i)).collect();
            let b: Vec<f64> = (0..g.nv).map(|j| (g.v(j)).cos()).collect();
            let th = solve_goursat(&gu, &gv, &f, &a, &b, g).unwrap();
            let q = diff_uv(&th)
                .unwrap()
                .sub(&gu.mul(&diff_u(&th).unwrap()))
                .sub(&gv.mul(&diff_v(&th).unwrap()))
                .add(&f.mul(&th));
            res.push(q.max_abs(2).value);
        }
        assert!(res[1] / res[2] > 3.5, "{res:?}");
    }
}
