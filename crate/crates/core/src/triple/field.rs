//! The tensor triple `(D1, D2, phi)` on the chart, built pointwise from a
//! deformation datum.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use crate::chart::fd::{diff_u, diff_v};
use crate::chart::grid::{ComplexField, Grid2, Matrix2Field, ScalarField};
use crate::defdata::{EllipticDatum, HyperbolicDatum};
use crate::error::{Error, Result};
use crate::gaussmap::ChartGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleKind {
    Hyperbolic,
    Elliptic,
}

impl TripleKind {
    /// `J` in the coordinate frame: `diag(1, -1)` or the rotation by `pi/2`.
    pub fn j_bar(self) -> Matrix2<f64> {
        match self {
            TripleKind::Hyperbolic => Matrix2::new(1.0, 0.0, 0.0, -1.0),
            TripleKind::Elliptic => Matrix2::new(0.0, -1.0, 1.0, 0.0),
        }
    }
}

/// Pointwise diagnostics; imaginary parts vanish for hyperbolic triples.
#[derive(Debug, Clone)]
pub struct TripleDiagnostics {
    pub alpha: ComplexField,
    pub beta: ComplexField,
    pub tau1: ComplexField,
    pub tau2: ComplexField,
    pub theta1: ComplexField,
    pub theta2: ComplexField,
}

#[derive(Debug, Clone)]
pub struct TripleField {
    pub kind: TripleKind,
    pub grid: Grid2,
    /// Real matrices in the `(d_u, d_v)` frame, realified for elliptic triples.
    pub d1: Matrix2Field,
    pub d2: Matrix2Field,
    /// Components `phi(d_u)`, `phi(d_v)` of the one-form.
    pub phi_u: ScalarField,
    pub phi_v: ScalarField,
    /// `phi(d_zbar)` for elliptic triples.
    pub phi_zbar: Option<ComplexField>,
    pub diag: TripleDiagnostics,
    /// Defect of the `i = 2` transport equations, which the one-form does not
    /// enter by construction.
    pub consistency: ScalarField,
}

fn cplx(f: &ScalarField) -> ComplexField {
    f.map(|x| Complex64::new(*x, 0.0))
}

fn hyperbolic_d(theta: f64) -> Matrix2<f64> {
    Matrix2::new(theta, 0.0, 0.0, 1.0 / theta) * FRAC_1_SQRT_2
}

fn elliptic_d(theta: Complex64) -> Matrix2<f64> {
    Matrix2::new(theta.re, -theta.im, theta.im, theta.re) * FRAC_1_SQRT_2
}

/// Roots of `tau^2 - alpha tau + alpha / beta = 0`, smaller first.
pub fn hyperbolic_roots(alpha: f64, beta: f64) -> Option<(f64, f64)> {
    if !(alpha > 0.0 && beta > 0.0 && alpha * beta - 4.0 > 0.0) {
        return None;
    }
    let s = ((alpha / beta) * (alpha * beta - 4.0)).sqrt();
    Some((0.5 * (alpha - s), 0.5 * (alpha + s)))
}

/// `tau = (alpha / 2)(1 +- i sqrt(4 - |alpha|^2) / |alpha|)`, `+` first.
pub fn elliptic_roots(alpha: Complex64) -> Option<(Complex64, Complex64)> {
    let a = alpha.norm();
    if !(a > 0.0 && a < 2.0) {
        return None;
    }
    let w = Complex64::new(0.0, (4.0 - a * a).sqrt() / a);
    Some((alpha * 0.5 * (1.0 + w), alpha * 0.5 * (1.0 - w)))
}

impl TripleField {
    /// Hyperbolic triple from `tau_1, tau_2` fields, computing the one-form
    /// from the `i = 1` transport equations of the chart.
    pub fn from_tau(geom: &ChartGeometry, tau1: &ScalarField, tau2: &ScalarField) -> Result<Self> {
        let grid = geom.grid;
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                let (a, b) = (*tau1.at(i, j), *tau2.at(i, j));
                if !(a > 0.0 && b > 0.0) || a == b {
                    return Err(Error::TripleDomain {
                        node: (i, j),
                        detail: format!("need distinct positive roots, got {a} and {b}"),
                    });
                }
            }
        }
        let th1 = tau1.map(|t| t.sqrt());
        let th2 = tau2.map(|t| t.sqrt());
        let inv1 = tau1.map(|t| 1.0 / t);
        let inv2 = tau2.map(|t| 1.0 / t);
        let (gu, gv) = (geom.gamma_u(), geom.gamma_v());
        let (inv1_u, inv2_u) = (diff_u(&inv1)?, diff_u(&inv2)?);
        let (tau1_v, tau2_v) = (diff_v(tau1)?, diff_v(tau2)?);
        let phi_u = ScalarField::from_nodes(grid, |i, j| {
            let p = th1.at(i, j) * th2.at(i, j);
            0.5 * p * (inv1_u.at(i, j) + 2.0 * (inv1.at(i, j) - 1.0) * gv.at(i, j))
        });
        let phi_v = ScalarField::from_nodes(grid, |i, j| {
            let p = th1.at(i, j) * th2.at(i, j);
            (tau1_v.at(i, j) + 2.0 * (tau1.at(i, j) - 1.0) * gu.at(i, j)) / (2.0 * p)
        });
        let consistency = ScalarField::from_nodes(grid, |i, j| {
            let p = th1.at(i, j) * th2.at(i, j);
            let a = inv2_u.at(i, j) + 2.0 * (inv2.at(i, j) - 1.0) * gv.at(i, j)
                + 2.0 * phi_u.at(i, j) / p;
            let b = tau2_v.at(i, j) + 2.0 * (tau2.at(i, j) - 1.0) * gu.at(i, j)
                + 2.0 * phi_v.at(i, j) * p;
            a.abs().max(b.abs())
        });
        let alpha = tau1.add(tau2);
        let beta = inv1.add(&inv2);
        Ok(TripleField {
            kind: TripleKind::Hyperbolic,
            grid,
            d1: th1.map(|t| hyperbolic_d(*t)),
            d2: th2.map(|t| hyperbolic_d(*t)),
            phi_u,
            phi_v,
            phi_zbar: None,
            diag: TripleDiagnostics {
                alpha: cplx(&alpha),
                beta: cplx(&beta),
                tau1: cplx(tau1),
                tau2: cplx(tau2),
                theta1: cplx(&th1),
                theta2: cplx(&th2),
            },
            consistency,
        })
    }

    /// Elliptic triple from the `tau_1` field (with `tau_2` its partner root),
    /// computing `phi(d_zbar)` from the `i = 1` transport equation.
    pub fn from_tau_complex(geom: &ChartGeometry, tau1: &ComplexField, tau2: &ComplexField) -> Result<Self> {
        let grid = geom.grid;
        let th1 = tau1.map(|t| t.sqrt());
        let th2 = tau2.map(|t| t.sqrt());
        let i_unit = Complex64::i();
        let dzbar = |f: &ComplexField| -> Result<ComplexField> {
            let fu = diff_u(f)?;
            let fv = diff_v(f)?;
            Ok(fu.zip_map(&fv, |a, b| (a + i_unit * b) * 0.5))
        };
        let (t1z, t2z) = (dzbar(tau1)?, dzbar(tau2)?);
        let g = &geom.gamma_c;
        let phi_zbar = ComplexField::from_nodes(grid, |i, j| {
            let p = th1.at(i, j) * th2.at(i, j);
            (t1z.at(i, j) + (tau1.at(i, j) - 1.0) * g.at(i, j) * 2.0) / (p * 2.0)
        });
        let consistency = ScalarField::from_nodes(grid, |i, j| {
            let p = th1.at(i, j) * th2.at(i, j);
            (t2z.at(i, j) + (tau2.at(i, j) - 1.0) * g.at(i, j) * 2.0 + phi_zbar.at(i, j) * p * 2.0).norm()
        });
        // phi(d_z) = conj(phi(d_zbar)); phi_u = 2 Re phi(d_z), phi_v = -2 Im phi(d_z).
        let phi_u = phi_zbar.map(|w| 2.0 * w.re);
        let phi_v = phi_zbar.map(|w| 2.0 * w.im);
        let alpha = tau1.zip_map(tau2, |a, b| a + b);
        let beta = tau1.zip_map(tau2, |a, b| a.inv() + b.inv());
        Ok(TripleField {
            kind: TripleKind::Elliptic,
            grid,
            d1: th1.map(|t| elliptic_d(*t)),
            d2: th2.map(|t| elliptic_d(*t)),
            phi_u,
            phi_v,
            phi_zbar: Some(phi_zbar),
            diag: TripleDiagnostics {
                alpha,
                beta,
                tau1: tau1.clone(),
                tau2: tau2.clone(),
                theta1: th1,
                theta2: th2,
            },
            consistency,
        })
    }

    /// Swaps the roles of `D1` and `D2`.
    pub fn swapped(&self) -> Self {
        let mut t = self.clone();
        std::mem::swap(&mut t.d1, &mut t.d2);
        std::mem::swap(&mut t.diag.tau1, &mut t.diag.tau2);
        std::mem::swap(&mut t.diag.theta1, &mut t.diag.theta2);
        t.phi_u = t.phi_u.scaled(-1.0);
        t.phi_v = t.phi_v.scaled(-1.0);
        t.phi_zbar = t.phi_zbar.map(|f| f.map(|w| -w));
        t
    }

    /// `phi = 1 / (alpha - 2)` and `psi = 1 / (beta - 2)`.
    pub fn recovered_pair(&self) -> (ComplexField, ComplexField) {
        (
            self.diag.alpha.map(|a| (a - 2.0).inv()),
            self.diag.beta.map(|b| (b - 2.0).inv()),
        )
    }
}

/// `alpha = 2 + 1/phi`, `beta = 2 + 1/psi`, `2 tau_i = alpha -+ sqrt((alpha/beta)(alpha beta - 4))`.
pub fn triple_from_pair(geom: &ChartGeometry, datum: &HyperbolicDatum) -> Result<TripleField> {
    let grid = geom.grid;
    let mut tau1 = ScalarField::zeros(grid);
    let mut tau2 = ScalarField::zeros(grid);
    for i in 0..grid.nu {
        for j in 0..grid.nv {
            let alpha = 2.0 + 1.0 / datum.phi.at(i, j);
            let beta = 2.0 + 1.0 / datum.psi.at(i, j);
            let (a, b) = hyperbolic_roots(alpha, beta).ok_or_else(|| Error::TripleDomain {
                node: (i, j),
                detail: format!(
                    "alpha = {alpha}, beta = {beta}, alpha beta - 4 = {} (need all positive)",
                    alpha * beta - 4.0
                ),
            })?;
            if a == b {
                return Err(Error::TripleDomain {
                    node: (i, j),
                    detail: "coalescent roots".into(),
                });
            }
            *tau1.at_mut(i, j) = a;
            *tau2.at_mut(i, j) = b;
        }
    }
    TripleField::from_tau(geom, &tau1, &tau2)
}

/// `alpha = 2 + 1/phi`, `tau_i = (alpha/2)(1 +- i sqrt(4 - |alpha|^2)/|alpha|)`.
pub fn triple_from_zeta(geom: &ChartGeometry, datum: &EllipticDatum) -> Result<TripleField> {
    let grid = geom.grid;
    let zero = Complex64::new(0.0, 0.0);
    let mut tau1 = ComplexField::filled(grid, zero);
    let mut tau2 = ComplexField::filled(grid, zero);
    for i in 0..grid.nu {
        for j in 0..grid.nv {
            let alpha = datum.phi.at(i, j).inv() + 2.0;
            let (a, b) = elliptic_roots(alpha).ok_or_else(|| Error::TripleDomain {
                node: (i, j),
                detail: format!("|alpha| = {} (need 0 < |alpha| < 2)", alpha.norm()),
            })?;
            *tau1.at_mut(i, j) = a;
            *tau2.at_mut(i, j) = b;
        }
    }
    TripleField::from_tau_complex(geom, &tau1, &tau2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defdata::{build_pair, build_zeta};
    use crate::gaussmap::{build_geometry, clifford_torus};

    fn roots_oracle(a: f64, b: f64) -> (f64, f64) {
        // Companion-matrix eigenvalues of tau^2 - a tau + a/b.
        let m = nalgebra::Matrix2::new(0.0, -a / b, 1.0, a);
        let e = m.complex_eigenvalues();
        let (x, y) = (e[0].re, e[1].re);
        (x.min(y), x.max(y))
    }

    #[test]
    fn hyperbolic_roots_match_the_companion_oracle() {
        for (a, b) in [(4.0, 4.0), (3.0, 2.5), (10.0, 0.7)] {
            let (t1, t2) = hyperbolic_roots(a, b).unwrap();
            let (o1, o2) = roots_oracle(a, b);
            assert!((t1 - o1).abs() < 1e-12 && (t2 - o2).abs() < 1e-12);
            assert!((t1 + t2 - a).abs() < 1e-12 && (1.0 / t1 + 1.0 / t2 - b).abs() < 1e-12);
        }
        assert!(hyperbolic_roots(1.0, 1.0).is_none());
    }

    #[test]
    fn clifford_instance_triple() {
        let g = Grid2::square(0.0, 1.0, 12).unwrap();
        let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
        let d = build_pair(&geom, &[0.5; 12], &[0.5; 12]).unwrap();
        let t = triple_from_pair(&geom, &d).unwrap();
        let s3 = 3.0_f64.sqrt();
        for k in 0..g.len() {
            assert!((t.diag.tau1.data[k].re - (2.0 - s3)).abs() < 1e-12);
            assert!((t.diag.tau2.data[k].re - (2.0 + s3)).abs() < 1e-12);
            assert!((t.d1.data[k].determinant() - 0.5).abs() < 1e-12);
            assert!((t.d2.data[k].determinant() - 0.5).abs() < 1e-12);
            assert!(t.phi_u.data[k].abs() < 1e-12 && t.phi_v.data[k].abs() < 1e-12);
        }
    }

    #[test]
    fn bad_alpha_beta_is_rejected_with_node() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
        let mut d = build_pair(&geom, &[0.5; 8], &[0.5; 8]).unwrap();
        // phi = -0.3 gives alpha < 0.
        *d.phi.at_mut(2, 6) = -0.3;
        assert!(matches!(
            triple_from_pair(&geom, &d),
            Err(Error::TripleDomain { node: (2, 6), .. })
        ));
    }

    #[test]
    fn elliptic_minus_one_instance() {
        let g = Grid2::new(-0.5, 0.5, 16, -0.5, 0.5, 17).unwrap();
        let zero = ComplexField::filled(g, Complex64::new(0.0, 0.0));
        let geom = ChartGeometry::with_elliptic_coefficients(zero, ScalarField::zeros(g)).unwrap();
        let d = build_zeta(&geom, &vec![Complex64::new(-1.0, 0.0); 16]).unwrap();
        let t = triple_from_zeta(&geom, &d).unwrap();
        let want = Complex64::new(0.5, 0.5 * 3.0_f64.sqrt());
        for k in 0..g.len() {
            let (a, b) = (t.diag.tau1.data[k], t.diag.tau2.data[k]);
            assert!((a - want).norm() < 1e-12 && (b - want.conj()).norm() < 1e-12);
            assert!((a.norm() - 1.0).abs() < 1e-12 && (b.norm() - 1.0).abs() < 1e-12);
            assert!((a + b - 1.0).norm() < 1e-12);
            assert!((t.d1.data[k].determinant() - 0.5).abs() < 1e-12);
            assert!(t.phi_zbar.as_ref().unwrap().data[k].norm() < 1e-12);
        }
    }

    #[test]
    fn elliptic_roots_reject_large_alpha() {
        assert!(elliptic_roots(Complex64::new(2.0, 0.0)).is_none());
        assert!(elliptic_roots(Complex64::new(0.0, 0.0)).is_none());
    }
}
