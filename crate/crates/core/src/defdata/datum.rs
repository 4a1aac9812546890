//! Deformation data `(U, V)` and `zeta`, the fields they induce, and
//! membership in the admissible set.

use std::collections::BTreeMap;

use log::{debug, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::q::{q_apply, q_apply_elliptic};
use crate::chart::fd::{cumint, d1_line, diff_u, diff_v, Axis};
use crate::chart::grid::{ComplexField, Field, Grid2, MaxAt, ScalarField, DEFAULT_BAND};
use crate::error::{Error, Result};
use crate::gaussmap::ChartGeometry;

/// Strict margin required by the admissibility inequalities.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-8;
/// `|2(phi + psi) + 1|` below this makes `rho` non-differentiable.
pub const RHO_FLOOR: f64 = 1e-12;

/// Which alternative of the hyperbolic admissibility condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `phi > 0` and `psi > 0`.
    BothPositive,
    /// `0 < 2 phi < -(2 psi + 1)`.
    PhiSmall,
    /// `0 < 2 psi < -(2 phi + 1)`.
    PsiSmall,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::BothPositive => "both_positive",
            Branch::PhiSmall => "phi_small",
            Branch::PsiSmall => "psi_small",
        }
    }

    /// Sign of `2(phi + psi) + 1` on this branch.
    pub fn rho_sign(self) -> f64 {
        match self {
            Branch::BothPositive => 1.0,
            Branch::PhiSmall | Branch::PsiSmall => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HyperbolicDatum {
    pub u_data: Vec<f64>,
    pub v_data: Vec<f64>,
    pub phi: ScalarField,
    pub psi: ScalarField,
    pub rho: ScalarField,
    pub branch: Field<Branch>,
    pub q_rho: ScalarField,
}

#[derive(Debug, Clone)]
pub struct EllipticDatum {
    /// Samples of `zeta` on the line `v = 0`.
    pub zeta: Vec<Complex64>,
    pub phi: ComplexField,
    pub rho: ScalarField,
    pub q_rho: ScalarField,
    /// Max of `|phi_zbar - 2 Gamma phi|` on the rows next to the data line.
    pub axis_transport_residual: f64,
}

#[derive(Debug, Clone)]
pub enum DeformationDatum {
    Hyperbolic(HyperbolicDatum),
    Elliptic(EllipticDatum),
}

impl DeformationDatum {
    pub fn kind(&self) -> &'static str {
        match self {
            DeformationDatum::Hyperbolic(_) => "hyperbolic",
            DeformationDatum::Elliptic(_) => "elliptic",
        }
    }

    pub fn rho(&self) -> &ScalarField {
        match self {
            DeformationDatum::Hyperbolic(d) => &d.rho,
            DeformationDatum::Elliptic(d) => &d.rho,
        }
    }

    pub fn q_rho(&self) -> &ScalarField {
        match self {
            DeformationDatum::Hyperbolic(d) => &d.q_rho,
            DeformationDatum::Elliptic(d) => &d.q_rho,
        }
    }
}

/// `phi = U(u) exp(2 int_0^v Gamma^u)`, `psi = V(v) exp(2 int_0^u Gamma^v)`
/// and `rho = sqrt|2(phi + psi) + 1|`.
pub fn build_pair(geom: &ChartGeometry, u_data: &[f64], v_data: &[f64]) -> Result<HyperbolicDatum> {
    let grid = geom.grid;
    if u_data.len() != grid.nu || v_data.len() != grid.nv {
        return Err(Error::ShapeMismatch(format!(
            "U has {} samples and V has {}, grid is {}x{}",
            u_data.len(),
            v_data.len(),
            grid.nu,
            grid.nv
        )));
    }
    let iu = cumint(geom.gamma_u(), Axis::V)?;
    let iv = cumint(geom.gamma_v(), Axis::U)?;
    let phi = ScalarField::from_nodes(grid, |i, j| u_data[i] * (2.0 * iu.at(i, j)).exp());
    let psi = ScalarField::from_nodes(grid, |i, j| v_data[j] * (2.0 * iv.at(i, j)).exp());
    phi.check_finite("phi")?;
    psi.check_finite("psi")?;

    let mut branch = Field::filled(grid, Branch::BothPositive);
    let mut rho = ScalarField::zeros(grid);
    for i in 0..grid.nu {
        for j in 0..grid.nv {
            let (p, s) = (*phi.at(i, j), *psi.at(i, j));
            let b = admissible_branch(p, s).ok_or_else(|| Error::Admissibility {
                condition: "(3)",
                node: (i, j),
                detail: format!(
                    "no branch holds: phi = {p}, psi = {s} (need phi, psi > 0, \
                     or 0 < 2phi < -(2psi+1), or 0 < 2psi < -(2phi+1))"
                ),
            })?;
            let arg = 2.0 * (p + s) + 1.0;
            if arg.abs() < RHO_FLOOR {
                return Err(Error::Admissibility {
                    condition: "rho",
                    node: (i, j),
                    detail: format!("2(phi + psi) + 1 = {arg}"),
                });
            }
            *branch.at_mut(i, j) = b;
            *rho.at_mut(i, j) = arg.abs().sqrt();
        }
    }
    let q_rho = q_apply(geom, &rho)?;
    Ok(HyperbolicDatum {
        u_data: u_data.to_vec(),
        v_data: v_data.to_vec(),
        phi,
        psi,
        rho,
        branch,
        q_rho,
    })
}

fn admissible_branch(phi: f64, psi: f64) -> Option<Branch> {
    let m = ADMISSIBILITY_MARGIN;
    if phi > m && psi > m {
        Some(Branch::BothPositive)
    } else if 2.0 * phi > m && -(2.0 * psi + 1.0) - 2.0 * phi > m {
        Some(Branch::PhiSmall)
    } else if 2.0 * psi > m && -(2.0 * phi + 1.0) - 2.0 * psi > m {
        Some(Branch::PsiSmall)
    } else {
        None
    }
}

/// Boundary data of the closed-form family `U = c - e^{-2 lambda}`, `V = d` of
/// isothermic charts, converted to the `phi(u, 0) = U`, `psi(0, v) = V`
/// normalization: `U(u) = (c E(u, 0) - 1) / 2` and `V(v) = d G(0, v) / 2`.
pub fn example_family(geom: &ChartGeometry, c: f64, d: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = geom.grid;
    let j0 = grid.zero_line_v().ok_or(Error::OriginNotOnGrid {
        axis: "v",
        coordinate: grid.v0,
    })?;
    let i0 = grid.zero_line_u().ok_or(Error::OriginNotOnGrid {
        axis: "u",
        coordinate: grid.u0,
    })?;
    let u = (0..grid.nu).map(|i| 0.5 * (c * geom.e.at(i, j0) - 1.0)).collect();
    let v = (0..grid.nv).map(|j| 0.5 * d * geom.g.at(i0, j)).collect();
    Ok((u, v))
}

/// Marches `phi_v = i phi_u - 4 i Gamma phi` (the transport
/// `phi_zbar = 2 Gamma phi`) away from the line `v = 0` with a Heun
/// predictor-corrector, then builds `rho = sqrt(-(4 Re phi + 1))`.
pub fn build_zeta(geom: &ChartGeometry, zeta: &[Complex64]) -> Result<EllipticDatum> {
    let grid = geom.grid;
    if zeta.len() != grid.nu {
        return Err(Error::ShapeMismatch(format!(
            "zeta has {} samples for {} nodes along u",
            zeta.len(),
            grid.nu
        )));
    }
    if zeta.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite {
            what: "zeta".into(),
            node: (0, 0),
        });
    }
    let j0 = grid.zero_line_v().ok_or(Error::OriginNotOnGrid {
        axis: "v",
        coordinate: grid.v0,
    })?;
    let zmax = zeta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let limit = 1e6 * (1.0 + zmax);
    let mut phi = ComplexField::filled(grid, Complex64::new(0.0, 0.0));
    for (i, z) in zeta.iter().enumerate() {
        *phi.at_mut(i, j0) = *z;
    }
    let rate = |row: &[Complex64], j: usize| -> Vec<Complex64> {
        let i_unit = Complex64::i();
        (0..grid.nu)
            .map(|i| {
                let du = d1_line(|k| row[k], grid.nu, grid.hu, i);
                i_unit * (du - geom.gamma_c.at(i, j) * row[i] * 4.0)
            })
            .collect()
    };
    let row_of = |phi: &ComplexField, j: usize| (0..grid.nu).map(|i| *phi.at(i, j)).collect::<Vec<_>>();
    let steps: Vec<(usize, usize, f64)> = (j0..grid.nv - 1)
        .map(|j| (j, j + 1, grid.hv))
        .chain((1..=j0).rev().map(|j| (j, j - 1, -grid.hv)))
        .collect();
    for (from, to, h) in steps {
        let cur = row_of(&phi, from);
        let k1 = rate(&cur, from);
        let pred: Vec<Complex64> = cur.iter().zip(&k1).map(|(p, k)| p + k * h).collect();
        let k2 = rate(&pred, to);
        for i in 0..grid.nu {
            let x = cur[i] + (k1[i] + k2[i]) * (0.5 * h);
            if !x.is_finite() || x.norm() > limit {
                return Err(Error::MarchingBlowup(format!(
                    "|phi| = {:.3e} at node ({i}, {to})",
                    x.norm()
                )));
            }
            *phi.at_mut(i, to) = x;
        }
    }

    let mut rho = ScalarField::zeros(grid);
    for i in 0..grid.nu {
        for j in 0..grid.nv {
            let p = *phi.at(i, j);
            if (p + 0.5).norm() <= ADMISSIBILITY_MARGIN {
                return Err(Error::Admissibility {
                    condition: "(4)",
                    node: (i, j),
                    detail: format!("phi = {p} equals -1/2"),
                });
            }
            let s = 4.0 * p.re + 1.0;
            if s >= -ADMISSIBILITY_MARGIN {
                return Err(Error::Admissibility {
                    condition: "(4)",
                    node: (i, j),
                    detail: format!("4 Re(phi) + 1 = {s} is not negative"),
                });
            }
            *rho.at_mut(i, j) = (-s).sqrt();
        }
    }
    let axis_transport_residual = elliptic_transport_residual(geom, &phi)?
        .data
        .chunks(grid.nv)
        .flat_map(|col| col[j0.saturating_sub(1)..(j0 + 2).min(grid.nv)].to_vec())
        .fold(0.0, f64::max);
    let tol = default_membership_tol(grid, zmax.max(1.0));
    if axis_transport_residual > tol {
        warn!(
            "zeta data look non-holomorphic: transport residual {axis_transport_residual:.3e} \
             next to the data line exceeds {tol:.3e}"
        );
    }
    let q_rho = q_apply_elliptic(geom, &rho)?;
    Ok(EllipticDatum {
        zeta: zeta.to_vec(),
        phi,
        rho,
        q_rho,
        axis_transport_residual,
    })
}

/// `|phi_v - 2 Gamma^u phi|` and `|psi_u - 2 Gamma^v psi|`, pointwise max.
pub fn hyperbolic_transport_residual(geom: &ChartGeometry, d: &HyperbolicDatum) -> Result<ScalarField> {
    let pv = diff_v(&d.phi)?;
    let su = diff_u(&d.psi)?;
    Ok(ScalarField::from_nodes(geom.grid, |i, j| {
        let a = pv.at(i, j) - 2.0 * geom.gamma_u().at(i, j) * d.phi.at(i, j);
        let b = su.at(i, j) - 2.0 * geom.gamma_v().at(i, j) * d.psi.at(i, j);
        a.abs().max(b.abs())
    }))
}

/// `|phi_zbar - 2 Gamma phi|` with `d_zbar = (d_u + i d_v) / 2`.
pub fn elliptic_transport_residual(geom: &ChartGeometry, phi: &ComplexField) -> Result<ScalarField> {
    let pu = diff_u(phi)?;
    let pv = diff_v(phi)?;
    let i = Complex64::i();
    Ok(ScalarField::from_nodes(geom.grid, |a, b| {
        ((pu.at(a, b) + i * pv.at(a, b)) * 0.5 - geom.gamma_c.at(a, b) * phi.at(a, b) * 2.0).norm()
    }))
}

/// `50 (hu^2 + hv^2)` times the field scale.
pub fn default_membership_tol(grid: Grid2, scale: f64) -> f64 {
    50.0 * grid.h2() * scale
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub pass: bool,
    pub max_residual: f64,
    pub node: (usize, usize),
    pub tol: f64,
    /// Node count per admissibility branch (hyperbolic data only).
    pub branches: BTreeMap<&'static str, usize>,
    #[serde(skip)]
    pub residual: ScalarField,
}

/// Pass iff `max |Q(rho)|` over the interior band is at most `tol`
/// (default `50 (hu^2 + hv^2) max|rho|`).
pub fn ch_membership(datum: &DeformationDatum, tol: Option<f64>) -> MembershipReport {
    let q = datum.q_rho();
    let rho = datum.rho();
    let tol = tol.unwrap_or_else(|| default_membership_tol(rho.grid, rho.max_abs(0).value));
    let MaxAt { value, node } = q.max_abs(DEFAULT_BAND);
    let mut branches = BTreeMap::new();
    if let DeformationDatum::Hyperbolic(d) = datum {
        for b in &d.branch.data {
            *branches.entry(b.name()).or_insert(0) += 1;
        }
    }
    debug!("membership residual {value:.3e} at {node:?}, tol {tol:.3e}");
    MembershipReport {
        pass: value <= tol,
        max_residual: value,
        node,
        tol,
        branches,
        residual: q.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussmap::{build_geometry, clifford_torus, rotational_isothermic, RadiusProfile};

    fn clifford(n: usize) -> ChartGeometry {
        build_geometry(&clifford_torus(Grid2::square(0.0, 1.0, n).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn clifford_half_half_is_a_constant_member() {
        let geom = clifford(16);
        let d = build_pair(&geom, &[0.5; 16], &[0.5; 16]).unwrap();
        assert!(d.rho.data.iter().all(|r| (r - 3.0_f64.sqrt()).abs() < 1e-15));
        assert!(d.branch.data.iter().all(|b| *b == Branch::BothPositive));
        let rep = ch_membership(&DeformationDatum::Hyperbolic(d), Some(1e-10));
        assert!(rep.pass && rep.max_residual == 0.0);
    }

    #[test]
    fn example_family_on_clifford_gives_half_half() {
        let geom = clifford(12);
        let (u, v) = example_family(&geom, 4.0, 2.0).unwrap();
        assert!(u.iter().chain(&v).all(|x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn clifford_quadratic_u_is_a_member() {
        let geom = clifford(33);
        let g = geom.grid;
        let u: Vec<f64> = (0..g.nu).map(|i| 1.0 + g.u(i).powi(2)).collect();
        let d = build_pair(&geom, &u, &vec![1.0; g.nv]).unwrap();
        for i in 0..g.nu {
            let want = (2.0 * g.u(i).powi(2) + 5.0).sqrt();
            assert!((d.rho.at(i, 3) - want).abs() < 1e-14);
        }
        assert!(ch_membership(&DeformationDatum::Hyperbolic(d), None).pass);
    }

    #[test]
    fn inadmissible_pair_names_the_node() {
        let geom = clifford(8);
        let mut u = vec![0.5; 8];
        u[5] = -0.1;
        match build_pair(&geom, &u, &[0.5; 8]) {
            Err(Error::Admissibility { condition: "(3)", node: (5, 0), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_branches_flip_the_rho_sign() {
        let geom = clifford(8);
        let d = build_pair(&geom, &[0.1; 8], &[-2.0; 8]).unwrap();
        assert!(d.branch.data.iter().all(|b| *b == Branch::PhiSmall));
        let d = build_pair(&geom, &[-2.0; 8], &[0.1; 8]).unwrap();
        assert!(d.branch.data.iter().all(|b| *b == Branch::PsiSmall));
        for k in 0..64 {
            let arg = 2.0 * (d.phi.data[k] + d.psi.data[k]) + 1.0;
            assert_eq!(arg.signum(), d.branch.data[k].rho_sign());
        }
    }

    #[test]
    fn rotational_transport_is_second_order() {
        let prof = RadiusProfile::default();
        let mut errs = Vec::new();
        for n in [17, 33, 65] {
            let g = Grid2::square(0.0, 1.0, n).unwrap();
            let geom = build_geometry(&rotational_isothermic(&prof, g).unwrap()).unwrap();
            let (u, v) = example_family(&geom, 4.0, 2.0).unwrap();
            let d = build_pair(&geom, &u, &v).unwrap();
            errs.push(hyperbolic_transport_residual(&geom, &d).unwrap().max_abs(0).value);
            assert!(d.q_rho.max_abs(DEFAULT_BAND).value < 1e-12);
        }
        assert!(errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn zeta_constant_minus_one() {
        let g = Grid2::new(-0.5, 0.5, 16, -0.5, 0.5, 17).unwrap();
        let zero = ComplexField::filled(g, Complex64::new(0.0, 0.0));
        let geom = ChartGeometry::with_elliptic_coefficients(zero, ScalarField::zeros(g)).unwrap();
        let d = build_zeta(&geom, &vec![Complex64::new(-1.0, 0.0); 16]).unwrap();
        assert!(d.rho.data.iter().all(|r| (r - 3.0_f64.sqrt()).abs() < 1e-15));
        assert!(d.q_rho.max_abs(0).value < 1e-12);
    }

    #[test]
    fn zeta_linear_is_transported_exactly() {
        let g = Grid2::new(-0.2, 0.2, 17, -0.2, 0.2, 17).unwrap();
        let zero = ComplexField::filled(g, Complex64::new(0.0, 0.0));
        let geom = ChartGeometry::with_elliptic_coefficients(zero, ScalarField::zeros(g)).unwrap();
        let zeta: Vec<Complex64> = (0..g.nu).map(|i| Complex64::new(-1.0 + g.u(i) / 10.0, 0.0)).collect();
        let d = build_zeta(&geom, &zeta).unwrap();
        for i in 0..g.nu {
            for j in 0..g.nv {
                let z = Complex64::new(g.u(i), g.v(j));
                assert!((d.phi.at(i, j) - (z / 10.0 - 1.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zeta_minus_half_is_rejected() {
        let g = Grid2::new(-0.5, 0.5, 8, -0.5, 0.5, 9).unwrap();
        let zero = ComplexField::filled(g, Complex64::new(0.0, 0.0));
        let geom = ChartGeometry::with_elliptic_coefficients(zero, ScalarField::zeros(g)).unwrap();
        assert!(matches!(
            build_zeta(&geom, &[Complex64::new(-0.5, 0.0); 8]),
            Err(Error::Admissibility { condition: "(4)", .. })
        ));
    }
}
