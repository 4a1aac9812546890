//! The hypersurface `f` from its Gauss image `h` and support function `gamma`.

use nalgebra::{DVector, Matrix2, Matrix3, Vector2};

use super::sample::{max3, node3, ImmersionSample, MaxAt3};
use crate::chart::grid::{Grid2, Grid3, Matrix2Field};
use crate::defdata::SupportFunction;
use crate::error::{Error, Result};
use crate::gaussmap::ChartGeometry;

/// Threshold on `det P`, signed by its value on the zero section, below
/// which the parametrization is singular.
pub const P_SINGULAR: f64 = 1e-10;

/// `f` together with the operator `P` per node.
#[derive(Debug, Clone)]
pub struct FSample {
    pub sample: ImmersionSample,
    /// `g P = Hess + gamma g - t B` per node (covariant, symmetric).
    pub gp: Vec<Matrix2<f64>>,
    /// Unit normal field of `h` spanning the ruling.
    pub ruling: Vec<DVector<f64>>,
    /// `true` when the requested ruling range was halved.
    pub shrunk: bool,
}

impl FSample {
    pub fn grid(&self) -> Grid3 {
        self.sample.grid
    }

    /// Max `|gP - (gP)^t|`.
    pub fn p_asymmetry(&self) -> f64 {
        self.gp.iter().map(|m| (m - m.transpose()).abs().max()).fold(0.0, f64::max)
    }

    /// Max `|gP J - J^t gP|` over nodes in the band.
    pub fn p_commutation(&self, j: &Matrix2<f64>, band: usize) -> MaxAt3 {
        let g = self.grid();
        max3(&g, band, |i, jj, k| {
            let m = self.gp[g.idx(i, jj, k)];
            (m * j - j.transpose() * m).abs().max()
        })
    }
}

fn vec_at(f: &crate::chart::grid::VectorField, i: usize, j: usize) -> DVector<f64> {
    DVector::from_column_slice(f.at(i, j))
}

/// Builds `f(y, t) = gamma h + h_* grad gamma + t e` on the ruling grid,
/// halving the ruling range once if `det P` gets too small.
pub fn gauss_param_f(geom: &ChartGeometry, gamma: &SupportFunction, grid: Grid3) -> Result<FSample> {
    match build(geom, gamma, grid) {
        Err(Error::SingularP { .. }) if grid.nt > 1 => {
            log::info!("P singular on [{}, {}], halving the ruling range", grid.t0, grid.t1);
            let half = Grid3::new(grid.base, 0.5 * grid.t0, 0.5 * grid.t1, grid.nt)?;
            let mut s = build(geom, gamma, half)?;
            s.shrunk = true;
            Ok(s)
        }
        other => other,
    }
}

fn build(geom: &ChartGeometry, gamma: &SupportFunction, grid: Grid3) -> Result<FSample> {
    let patch = geom
        .patch
        .as_ref()
        .ok_or_else(|| Error::Unsupported("reconstruction needs an immersed chart".into()))?;
    if geom.ambient != 4 || geom.normals.len() != 1 {
        return Err(Error::Unsupported(format!(
            "reconstruction supports surfaces in S^3 only, got ambient dimension {}",
            geom.ambient
        )));
    }
    if grid.base != geom.grid || gamma.grid() != geom.grid {
        return Err(Error::ShapeMismatch("ruling grid and chart differ".into()));
    }
    let base: Grid2 = geom.grid;
    let b = Matrix2Field::from_nodes(base, |i, j| {
        let off = geom.alpha_uv.at(i, j)[0];
        Matrix2::new(geom.alpha_uu.at(i, j)[0], off, off, geom.alpha_vv.at(i, j)[0])
    });
    let n = grid.len();
    let mut pos = Vec::with_capacity(n);
    let mut frame = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut metric = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let mut gp = Vec::with_capacity(n);
    let mut ruling = Vec::with_capacity(n);
    for idx in 0..n {
        let (i, j, k) = node3(&grid, idx);
        let t = grid.t(k);
        let h = vec_at(&patch.pos, i, j);
        let hk = [vec_at(&patch.du, i, j), vec_at(&patch.dv, i, j)];
        let e = vec_at(&geom.normals[0], i, j);
        let bm = b.at(i, j);
        let alpha = |a: usize, c: usize| &e * bm[(a, c)];
        let gm = geom.metric_at(i, j);
        let ginv = gm.try_inverse().ok_or(Error::DegenerateMetric { node: (i, j), det: gm.determinant() })?;
        let gam = *gamma.gamma.at(i, j);
        let grad: Vector2<f64> = *gamma.grad.at(i, j);
        let kt = gamma.hess.at(i, j) + gm * gam - b.at(i, j) * t;
        let p = ginv * kt;
        let det = p.determinant();
        let det0 = (ginv * (gamma.hess.at(i, j) + gm * gam)).determinant();
        if !(det * det0.signum() > P_SINGULAR) {
            return Err(Error::SingularP { node: (i, j, k), det });
        }
        let x = &h * gam + &hk[0] * grad[0] + &hk[1] * grad[1] + &e * t;
        let tangent = |a: usize| -> DVector<f64> {
            &hk[0] * p[(0, a)] + &hk[1] * p[(1, a)] + alpha(a, 0) * grad[0] + alpha(a, 1) * grad[1]
        };
        let fr = [tangent(0), tangent(1), e.clone()];
        let mut ii = Matrix3::zeros();
        ii.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-kt));
        metric.push(Matrix3::from_fn(|a, c| fr[a].dot(&fr[c])));
        pos.push(x);
        frame.push(fr);
        normals.push(vec![h]);
        second.push(vec![ii]);
        gp.push(kt);
        ruling.push(e);
    }
    Ok(FSample {
        sample: ImmersionSample { grid, dim: 4, pos, frame, normals, metric, second },
        gp,
        ruling,
        shrunk: false,
    })
}

/// Comparison of the shape operator from the `P` pairing with
/// `-d N` by finite differences, for both global signs.
#[derive(Debug, Clone)]
pub struct ShapeCrossCheck {
    /// `+1` or `-1`, whichever fits better.
    pub sign: f64,
    pub residual: MaxAt3,
    pub other_sign_residual: f64,
}

/// `A = G^{-1} II` against the frame coordinates of `-dN` with `dN` by
/// finite differences of the sampled normal.
pub fn shape_cross_check(f: &ImmersionSample, band: usize) -> ShapeCrossCheck {
    let g = f.grid;
    let nfield: Vec<DVector<f64>> = f.normals.iter().map(|n| n[0].clone()).collect();
    let a_fd = |i: usize, j: usize, k: usize| -> Matrix3<f64> {
        let n = g.idx(i, j, k);
        let fr = &f.frame[n];
        let ginv = f.metric[n].try_inverse().unwrap_or_else(Matrix3::zeros);
        let mut m = Matrix3::zeros();
        for a in 0..2 {
            let dn = diff_vec(&nfield, &g, a, i, j, k);
            let rhs = nalgebra::Vector3::from_fn(|b, _| -dn.dot(&fr[b]));
            m.set_column(a, &(ginv * rhs));
        }
        m
    };
    let a_pair = |n: usize| f.metric[n].try_inverse().unwrap_or_else(Matrix3::zeros) * f.second[n][0];
    let mut worst = [0.0_f64; 2];
    let plus = max3(&g, band, |i, j, k| {
        let d = a_fd(i, j, k);
        let ap = a_pair(g.idx(i, j, k));
        worst[1] = worst[1].max((ap + d).abs().max());
        (ap - d).abs().max()
    });
    if plus.value <= worst[1] {
        ShapeCrossCheck { sign: 1.0, residual: plus, other_sign_residual: worst[1] }
    } else {
        let minus = max3(&g, band, |i, j, k| (a_pair(g.idx(i, j, k)) + a_fd(i, j, k)).abs().max());
        ShapeCrossCheck { sign: -1.0, residual: minus, other_sign_residual: plus.value }
    }
}

fn diff_vec(data: &[DVector<f64>], g: &Grid3, axis: usize, i: usize, j: usize, k: usize) -> DVector<f64> {
    let m = data[0].len();
    DVector::from_fn(m, |c, _| {
        let comp: Vec<f64> = match axis {
            0 => (0..g.base.nu).map(|a| data[g.idx(a, j, k)][c]).collect(),
            1 => (0..g.base.nv).map(|b| data[g.idx(i, b, k)][c]).collect(),
            _ => (0..g.nt).map(|s| data[g.idx(i, j, s)][c]).collect(),
        };
        let at = [i, j, k][axis];
        let h = [g.base.hu, g.base.hv, g.ht][axis];
        crate::chart::fd::d1_line(|s| comp[s], comp.len(), h, at)
    })
}
