//! Conjugacy type of a chart: the tensor `J` with
//! `alpha(JX, Y) = alpha(X, JY)` and `J^2 = eps I`.

use std::fmt;

use log::info;
use nalgebra::{DMatrix, Matrix2, Matrix3, RowVector3};
use serde::{Deserialize, Serialize};

use super::geometry::ChartGeometry;
use crate::chart::grid::{Field, Matrix2Field, ScalarField};
use crate::error::{Error, Result};

/// Relative threshold for a singular value of the moment matrix to count.
pub const RANK_TOL: f64 = 1e-8;
/// Relative threshold on `ab - c^2` below which a node is parabolic.
pub const PARABOLIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugacyKind {
    Hyperbolic,
    Elliptic,
    Parabolic,
    Undetermined,
}

impl ConjugacyKind {
    /// `eps` in `J^2 = eps I`; undetermined nodes carry `J = 0`.
    pub fn epsilon(self) -> f64 {
        match self {
            ConjugacyKind::Hyperbolic => 1.0,
            ConjugacyKind::Elliptic => -1.0,
            ConjugacyKind::Parabolic | ConjugacyKind::Undetermined => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConjugacyKind::Hyperbolic => "hyperbolic",
            ConjugacyKind::Elliptic => "elliptic",
            ConjugacyKind::Parabolic => "parabolic",
            ConjugacyKind::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for ConjugacyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ConjugacyStructure {
    pub kind: ConjugacyKind,
    /// `J` in the coordinate frame, columns are `J d_u` and `J d_v`.
    pub j: Matrix2Field,
    pub node_kinds: Field<ConjugacyKind>,
    /// Dimension of the first normal space at each node.
    pub normal_rank: Field<u8>,
    /// Max over nodes of `|alpha(J d_u, d_v) - alpha(d_u, J d_v)|`.
    pub residual: f64,
}

impl ConjugacyStructure {
    /// Max over nodes of `|J^2 - eps I|`.
    pub fn square_defect(&self) -> f64 {
        self.j
            .zip_map(&self.node_kinds, |j, k| {
                (j * j - Matrix2::identity() * k.epsilon()).abs().max()
            })
            .data
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Solves `a alpha(X,X) + 2c alpha(X,Y) + b alpha(Y,Y) = 0` at every node and
/// assembles `J`.
pub fn classify(geom: &ChartGeometry) -> Result<ConjugacyStructure> {
    let grid = geom.grid;
    let nn = geom.alpha_uu.dim;
    let mut j = Matrix2Field::filled(grid, Matrix2::zeros());
    let mut kinds = Field::filled(grid, ConjugacyKind::Undetermined);
    let mut ranks = Field::filled(grid, 0u8);
    for i in 0..grid.nu {
        for jj in 0..grid.nv {
            let (auu, auv, avv) = (
                geom.alpha_uu.at(i, jj),
                geom.alpha_uv.at(i, jj),
                geom.alpha_vv.at(i, jj),
            );
            let moments = DMatrix::from_fn(nn, 3, |r, c| [auu, auv, avv][c][r]);
            let scale = geom.e.at(i, jj) + geom.g.at(i, jj);
            let rank = numeric_rank(&moments, scale);
            *ranks.at_mut(i, jj) = rank as u8;
            let mut rows: Vec<RowVector3<f64>> = (0..nn)
                .map(|r| RowVector3::new(auu[r], avv[r], 2.0 * auv[r]))
                .collect();
            let solvable = match rank {
                3.. => return Err(Error::FirstNormalSpaceTooLarge { node: (i, jj) }),
                2 => true,
                1 => {
                    rows.push(RowVector3::new(
                        *geom.e.at(i, jj),
                        *geom.g.at(i, jj),
                        2.0 * geom.f.at(i, jj),
                    ));
                    let m = DMatrix::from_fn(rows.len(), 3, |r, c| rows[r][c] / row_norm(&rows[r]));
                    numeric_rank(&m, 1.0) == 2
                }
                _ => false,
            };
            if !solvable {
                continue;
            }
            let (a, b, c) = null_vector(&rows);
            let (kind, jm) = assemble(a, b, c);
            *kinds.at_mut(i, jj) = kind;
            *j.at_mut(i, jj) = jm;
        }
    }

    let first = kinds.data[0];
    let kind = if kinds.data.iter().all(|k| *k == first) {
        first
    } else {
        ConjugacyKind::Undetermined
    };
    if kind == ConjugacyKind::Undetermined {
        let mut counts = std::collections::BTreeMap::new();
        for k in &kinds.data {
            *counts.entry(k.name()).or_insert(0usize) += 1;
        }
        info!("conjugacy type undetermined; node kinds {counts:?}");
    }
    let residual = conjugacy_residual(geom, &j).max_abs(0).value;
    Ok(ConjugacyStructure {
        kind,
        j,
        node_kinds: kinds,
        normal_rank: ranks,
        residual,
    })
}

fn row_norm(r: &RowVector3<f64>) -> f64 {
    let n = r.norm();
    if n > 0.0 {
        n
    } else {
        1.0
    }
}

/// Number of singular values above `RANK_TOL` times the largest; zero when
/// the largest is negligible against `scale`.
fn numeric_rank(m: &DMatrix<f64>, scale: f64) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if !(top > 1e-12 * scale) {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

/// Unit `(a, b, c)` spanning the kernel of the stacked rows, each row scaled
/// to unit length first.
fn null_vector(rows: &[RowVector3<f64>]) -> (f64, f64, f64) {
    let mut ata = Matrix3::zeros();
    for r in rows {
        let r = r / row_norm(r);
        ata += r.transpose() * r;
    }
    let eig = ata.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let x = eig.eigenvectors.column(k);
    (x[0], x[1], x[2])
}

/// `J = [[c, -a], [b, -c]]`, normalized so that `J^2 = eps I`, with the sign
/// chosen so that the first non-negligible entry in `J11, J21, J12` is
/// positive.
fn assemble(a: f64, b: f64, c: f64) -> (ConjugacyKind, Matrix2<f64>) {
    let disc = a * b - c * c;
    let size = a * a + b * b + c * c;
    let mut jm = Matrix2::new(c, -a, b, -c);
    let kind = if disc.abs() <= PARABOLIC_TOL * size {
        jm /= size.sqrt();
        ConjugacyKind::Parabolic
    } else if disc < 0.0 {
        jm /= (-disc).sqrt();
        ConjugacyKind::Hyperbolic
    } else {
        jm /= disc.sqrt();
        ConjugacyKind::Elliptic
    };
    let tiny = 1e-12 * jm.abs().max();
    let lead = [jm[(0, 0)], jm[(1, 0)], jm[(0, 1)]]
        .into_iter()
        .find(|x| x.abs() > tiny)
        .unwrap_or(1.0);
    if lead < 0.0 {
        jm = -jm;
    }
    (kind, jm)
}

/// `|alpha(J d_u, d_v) - alpha(d_u, J d_v)|` at every node.
pub fn conjugacy_residual(geom: &ChartGeometry, j: &Matrix2Field) -> ScalarField {
    ScalarField::from_nodes(geom.grid, |i, jj| {
        let m = j.at(i, jj);
        let (auu, auv, avv) = (
            geom.alpha_uu.at(i, jj),
            geom.alpha_uv.at(i, jj),
            geom.alpha_vv.at(i, jj),
        );
        (0..auu.len())
            .map(|r| {
                let left = m[(0, 0)] * auv[r] + m[(1, 0)] * avv[r];
                let right = m[(0, 1)] * auu[r] + m[(1, 1)] * auv[r];
                (left - right).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    })
}

/// Distance between two `J` fields up to a global sign at each node.
pub fn j_distance(a: &Matrix2Field, b: &Matrix2Field) -> f64 {
    a.zip_map(b, |x, y| (x - y).abs().max().min((x + y).abs().max()))
        .data
        .into_iter()
        .fold(0.0, f64::max)
}

/// `K J - J^T K` for the symmetric form `K = Hess + theta g`.
pub fn commutation_residual(
    geom: &ChartGeometry,
    hess: &Matrix2Field,
    theta: &ScalarField,
    j: &Matrix2Field,
) -> ScalarField {
    ScalarField::from_nodes(geom.grid, |i, jj| {
        let k = hess.at(i, jj) + geom.metric_at(i, jj) * *theta.at(i, jj);
        let jm = j.at(i, jj);
        (k * jm - jm.transpose() * k).abs().max()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::{Grid2, VectorField};
    use crate::gaussmap::catalog::{clifford_torus, rotational_isothermic, RadiusProfile};
    use crate::gaussmap::geometry::build_geometry;
    use proptest::prelude::*;

    fn with_alpha(geom: &ChartGeometry, uu: [f64; 2], uv: [f64; 2], vv: [f64; 2]) -> ChartGeometry {
        let mut g = geom.clone();
        let grid = g.grid;
        g.alpha_uu = VectorField::from_fn(grid, 2, |_, _, x| x.copy_from_slice(&uu));
        g.alpha_uv = VectorField::from_fn(grid, 2, |_, _, x| x.copy_from_slice(&uv));
        g.alpha_vv = VectorField::from_fn(grid, 2, |_, _, x| x.copy_from_slice(&vv));
        g
    }

    fn flat(n: usize) -> ChartGeometry {
        let g = Grid2::square(0.0, 1.0, n).unwrap();
        let z = ScalarField::zeros(g);
        ChartGeometry::with_hyperbolic_coefficients(z.clone(), z.clone(), z).unwrap()
    }

    #[test]
    fn clifford_is_hyperbolic_with_diagonal_j() {
        let g = Grid2::square(0.0, 1.0, 12).unwrap();
        let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
        let s = classify(&geom).unwrap();
        assert_eq!(s.kind, ConjugacyKind::Hyperbolic);
        for m in &s.j.data {
            assert!((m - Matrix2::new(1.0, 0.0, 0.0, -1.0)).abs().max() < 1e-12);
        }
        assert!(s.square_defect() < 1e-10);
        assert!(s.residual < 1e-14);
    }

    #[test]
    fn rotational_chart_is_hyperbolic() {
        let g = Grid2::square(0.0, 1.0, 12).unwrap();
        let geom = build_geometry(&rotational_isothermic(&RadiusProfile::default(), g).unwrap()).unwrap();
        let s = classify(&geom).unwrap();
        assert_eq!(s.kind, ConjugacyKind::Hyperbolic);
        assert!(s.square_defect() < 1e-10);
    }

    #[test]
    fn rank_two_conjugate_chart_is_diagonal() {
        let geom = with_alpha(&flat(8), [1.0, 0.3], [0.0, 0.0], [0.2, -1.0]);
        let s = classify(&geom).unwrap();
        assert_eq!(s.kind, ConjugacyKind::Hyperbolic);
        assert!((s.j.data[5] - Matrix2::new(1.0, 0.0, 0.0, -1.0)).abs().max() < 1e-12);
        assert!(s.normal_rank.data.iter().all(|r| *r == 2));
    }

    #[test]
    fn rank_two_elliptic_chart() {
        // alpha_uu = -alpha_vv and alpha_uv independent: J = rotation.
        let geom = with_alpha(&flat(8), [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]);
        let s = classify(&geom).unwrap();
        assert_eq!(s.kind, ConjugacyKind::Elliptic);
        assert!(s.square_defect() < 1e-10);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn vanishing_second_form_is_undetermined() {
        let geom = with_alpha(&flat(8), [0.0; 2], [0.0; 2], [0.0; 2]);
        let s = classify(&geom).unwrap();
        assert_eq!(s.kind, ConjugacyKind::Undetermined);
        assert!(s.normal_rank.data.iter().all(|r| *r == 0));
    }

    #[test]
    fn umbilic_rank_one_is_undetermined() {
        let geom = with_alpha(&flat(8), [2.0, 0.0], [0.0, 0.0], [2.0, 0.0]);
        assert_eq!(classify(&geom).unwrap().kind, ConjugacyKind::Undetermined);
    }

    #[test]
    fn parabolic_tie() {
        // a = 1, b = 1, c = 1 solves alpha_uu + 2 alpha_uv + alpha_vv = 0 with ab = c^2.
        let geom = with_alpha(&flat(8), [1.0, 0.0], [-1.0, 1.0], [1.0, -2.0]);
        assert_eq!(classify(&geom).unwrap().kind, ConjugacyKind::Parabolic);
    }

    #[test]
    fn mixed_chart_keeps_node_map() {
        let mut geom = with_alpha(&flat(8), [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]);
        geom.alpha_uv.at_mut(3, 3).copy_from_slice(&[0.0, 0.0]);
        geom.alpha_vv.at_mut(3, 3).copy_from_slice(&[0.0, 1.0]);
        let s = classify(&geom).unwrap();
        assert_eq!(s.kind, ConjugacyKind::Undetermined);
        assert_eq!(*s.node_kinds.at(3, 3), ConjugacyKind::Hyperbolic);
        assert_eq!(*s.node_kinds.at(0, 0), ConjugacyKind::Elliptic);
    }

    #[test]
    fn three_dimensional_first_normal_space_is_rejected() {
        let mut geom = flat(8);
        let grid = geom.grid;
        geom.alpha_uu = VectorField::from_fn(grid, 3, |_, _, x| x.copy_from_slice(&[1.0, 0.0, 0.0]));
        geom.alpha_uv = VectorField::from_fn(grid, 3, |_, _, x| x.copy_from_slice(&[0.0, 1.0, 0.0]));
        geom.alpha_vv = VectorField::from_fn(grid, 3, |_, _, x| x.copy_from_slice(&[0.0, 0.0, 1.0]));
        assert!(matches!(classify(&geom), Err(Error::FirstNormalSpaceTooLarge { node: (0, 0) })));
    }

    proptest! {
        #[test]
        fn classification_is_scale_invariant(
            uu in proptest::array::uniform2(-2.0f64..2.0),
            uv in proptest::array::uniform2(-2.0f64..2.0),
            vv in proptest::array::uniform2(-2.0f64..2.0),
            amp in 0.1f64..3.0,
        ) {
            let base = with_alpha(&flat(8), uu, uv, vv);
            let a = classify(&base).unwrap();
            prop_assume!(a.node_kinds.data.iter().all(|k| *k != ConjugacyKind::Parabolic));
            let mut scaled = base.clone();
            let grid = scaled.grid;
            for i in 0..grid.nu {
                for j in 0..grid.nv {
                    let s = amp * (1.0 + 0.5 * (i as f64 - j as f64).sin());
                    for f in [&mut scaled.alpha_uu, &mut scaled.alpha_uv, &mut scaled.alpha_vv] {
                        f.at_mut(i, j).iter_mut().for_each(|x| *x *= s);
                    }
                }
            }
            let b = classify(&scaled).unwrap();
            prop_assert_eq!(a.kind, b.kind);
            prop_assert!(j_distance(&a.j, &b.j) < 1e-8);
            prop_assert!(a.square_defect() < 1e-10 && b.square_defect() < 1e-10);
        }
    }
}
