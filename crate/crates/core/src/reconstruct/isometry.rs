//! Nodewise comparison of induced metrics.

use super::sample::{max3, ImmersionSample, MaxAt3};
use crate::chart::grid::DEFAULT_BAND;
use crate::error::{Error, Result};
use crate::report::{Check, CheckSet};

/// Smallest `sigma_2 / sigma_1` accepted as a two-dimensional first normal
/// space.
pub const NORMAL_RANK_GAP: f64 = 1e-3;

pub fn check3(m: MaxAt3, tol: f64, margin: bool) -> Check {
    let ok = m.value.is_finite() && if margin { m.value > tol } else { m.value <= tol };
    Check {
        max_residual: m.value,
        node: vec![m.node.0, m.node.1, m.node.2],
        tol,
        pass: ok,
    }
}

/// Max relative Frobenius deviation of the metrics from differences of the
/// positions, over nodes at least `DEFAULT_BAND` away from the edges.
pub fn metric_deviation(f: &ImmersionSample, g: &ImmersionSample) -> Result<MaxAt3> {
    if f.grid != g.grid {
        return Err(Error::ShapeMismatch("samples live on different grids".into()));
    }
    let (mf, mg) = (f.metric_fd()?, g.metric_fd()?);
    let grid = f.grid;
    Ok(max3(&grid, DEFAULT_BAND, |i, j, k| {
        let n = grid.idx(i, j, k);
        (mg[n] - mf[n]).norm() / mf[n].norm()
    }))
}

/// Metric deviation against `tol` and, when `g` carries two normals, the
/// rank of its first normal space.
pub fn isometry_check(f: &ImmersionSample, g: &ImmersionSample, tol: f64) -> Result<CheckSet> {
    let mut out = CheckSet::default();
    out.insert("metric", check3(metric_deviation(f, g)?, tol, false));
    if g.second.first().is_some_and(|s| s.len() == 2) {
        let grid = g.grid;
        let worst = max3(&grid, DEFAULT_BAND, |i, j, k| {
            -first_normal_ratio(&g.second[grid.idx(i, j, k)])
        });
        let m = MaxAt3 { value: -worst.value, node: worst.node };
        out.insert("normal_rank", check3(m, NORMAL_RANK_GAP, true));
    }
    Ok(out)
}

/// `sigma_2 / sigma_1` of the matrix with rows `(II_1(a, b), II_2(a, b))`.
pub fn first_normal_ratio(ii: &[nalgebra::Matrix3<f64>]) -> f64 {
    let m = nalgebra::SMatrix::<f64, 6, 2>::from_fn(|r, s| {
        let (a, b) = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)][r];
        ii[s][(a, b)]
    });
    let sv = m.singular_values();
    let hi = sv.max();
    if hi > 0.0 {
        sv.min() / hi
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::{Grid2, Grid3};
    use crate::defdata::warped_support;
    use crate::gaussmap::{build_geometry, clifford_torus};
    use crate::reconstruct::fside::gauss_param_f;
    use nalgebra::{DMatrix, DVector, Matrix3, Rotation3};

    fn sample() -> ImmersionSample {
        let g = Grid2::square(0.0, 1.0, 12).unwrap();
        let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
        let s = warped_support(&geom, &[1.0; 12]).unwrap();
        gauss_param_f(&geom, &s, Grid3::new(g, -0.1, 0.1, 5).unwrap()).unwrap().sample
    }

    #[test]
    fn rigid_motion_is_an_isometry() {
        let f = sample();
        let r3 = Rotation3::from_euler_angles(0.4, 0.1, -0.7);
        let mut r = DMatrix::identity(4, 4);
        for a in 0..3 {
            for b in 0..3 {
                r[(a, b)] = r3[(a, b)];
            }
        }
        let moved = f.moved(&r, &DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        assert!(metric_deviation(&f, &f).unwrap().value == 0.0);
        assert!(metric_deviation(&f, &moved).unwrap().value < 1e-13);
        assert!(isometry_check(&f, &moved, 1e-10).unwrap().pass());
    }

    #[test]
    fn scaling_is_detected() {
        let f = sample();
        let scaled = f.moved(&(DMatrix::identity(4, 4) * 1.01), &DVector::zeros(4));
        let d = metric_deviation(&f, &scaled).unwrap().value;
        assert!((d - (1.01_f64.powi(2) - 1.0)).abs() < 1e-12, "{d}");
    }

    #[test]
    fn normal_ratio_separates_rank() {
        let a = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0);
        let b = Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!((first_normal_ratio(&[a, b]) - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!(first_normal_ratio(&[a, a * 2.0]) < 1e-12);
    }
}
