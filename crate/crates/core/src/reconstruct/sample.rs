//! Immersions sampled on a `(u, v, t)` grid.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::chart::fd::{d1_line, Stencil};
use crate::chart::grid::{Grid3, MaxAt};
use crate::error::{Error, Result};

/// Positions, tangent frame, normals and fundamental forms per node.
#[derive(Debug, Clone)]
pub struct ImmersionSample {
    pub grid: Grid3,
    /// Target dimension.
    pub dim: usize,
    pub pos: Vec<DVector<f64>>,
    /// `[f_u, f_v, f_t]` per node.
    pub frame: Vec<[DVector<f64>; 3]>,
    /// Unit normals per node.
    pub normals: Vec<Vec<DVector<f64>>>,
    /// Gram matrix of the frame.
    pub metric: Vec<Matrix3<f64>>,
    /// Second fundamental form, one matrix per normal.
    pub second: Vec<Vec<Matrix3<f64>>>,
}

/// Node index triple of a storage index.
pub fn node3(g: &Grid3, n: usize) -> (usize, usize, usize) {
    let k = n % g.nt;
    let ij = n / g.nt;
    (ij / g.base.nv, ij % g.base.nv, k)
}

/// First derivative along axis `0 = u`, `1 = v`, `2 = t` at a node.
pub fn diff3<T: Stencil>(data: &[T], g: &Grid3, axis: usize, i: usize, j: usize, k: usize) -> T {
    match axis {
        0 => d1_line(|a| data[g.idx(a, j, k)], g.base.nu, g.base.hu, i),
        1 => d1_line(|b| data[g.idx(i, b, k)], g.base.nv, g.base.hv, j),
        _ => d1_line(|c| data[g.idx(i, j, c)], g.nt, g.ht, k),
    }
}

/// Maximum of `f` over nodes at least `band` away from the `u, v` edges.
pub fn max3(g: &Grid3, band: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> MaxAt3 {
    let mut best = MaxAt3 { value: 0.0, node: (0, 0, 0) };
    let mut found = false;
    for i in 0..g.base.nu {
        for j in 0..g.base.nv {
            if g.in_band(i, j, band) {
                continue;
            }
            for k in 0..g.nt {
                let x = f(i, j, k);
                if !found || x > best.value || x.is_nan() && !best.value.is_nan() {
                    best = MaxAt3 { value: x, node: (i, j, k) };
                    found = true;
                }
            }
        }
    }
    best
}

/// A maximum and the node where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxAt3 {
    pub value: f64,
    pub node: (usize, usize, usize),
}

impl From<MaxAt3> for MaxAt {
    fn from(m: MaxAt3) -> Self {
        MaxAt { value: m.value, node: (m.node.0, m.node.1) }
    }
}

impl ImmersionSample {
    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// Induced metric from second-order differences of the positions.
    pub fn metric_fd(&self) -> Result<Vec<Matrix3<f64>>> {
        let g = &self.grid;
        if g.nt < 3 {
            return Err(Error::GridTooSmall { axis: "t", nodes: g.nt, needed: 3 });
        }
        Ok((0..self.len())
            .map(|n| {
                let (i, j, k) = node3(g, n);
                let d: Vec<DVector<f64>> = (0..3)
                    .map(|a| {
                        let line = |m: usize| {
                            let idx = match a {
                                0 => g.idx(m, j, k),
                                1 => g.idx(i, m, k),
                                _ => g.idx(i, j, m),
                            };
                            &self.pos[idx]
                        };
                        let (nn, h, at) = match a {
                            0 => (g.base.nu, g.base.hu, i),
                            1 => (g.base.nv, g.base.hv, j),
                            _ => (g.nt, g.ht, k),
                        };
                        fd_vector(line, nn, h, at)
                    })
                    .collect();
                Matrix3::from_fn(|a, b| d[a].dot(&d[b]))
            })
            .collect())
    }

    /// Full rank of the frame and orthonormality of the normals.
    pub fn validate(&self) -> Result<()> {
        for n in 0..self.len() {
            let (i, j, _) = node3(&self.grid, n);
            let f = &self.frame[n];
            let m = DMatrix::from_columns(&[f[0].clone(), f[1].clone(), f[2].clone()]);
            let sv = m.singular_values();
            let (lo, hi) = (sv.min(), sv.max());
            if !(lo > 1e-8 * hi) {
                return Err(Error::PatchInvariant {
                    what: format!("frame rank loss, singular values {lo:e} / {hi:e}"),
                    node: (i, j),
                });
            }
            let nn = &self.normals[n];
            for (a, x) in nn.iter().enumerate() {
                for (b, y) in nn.iter().enumerate() {
                    let want = if a == b { 1.0 } else { 0.0 };
                    if (x.dot(y) - want).abs() > 1e-8 {
                        return Err(Error::PatchInvariant { what: "normals not orthonormal".into(), node: (i, j) });
                    }
                }
                if f.iter().any(|t| x.dot(t).abs() > 1e-8 * t.norm().max(1.0)) {
                    return Err(Error::PatchInvariant { what: "normal not orthogonal to frame".into(), node: (i, j) });
                }
            }
        }
        Ok(())
    }

    /// Copy with `x -> r x + c` applied to positions, frame and normals.
    pub fn moved(&self, r: &DMatrix<f64>, c: &DVector<f64>) -> Self {
        let mut s = self.clone();
        for p in &mut s.pos {
            *p = r * &*p + c;
        }
        for f in &mut s.frame {
            for t in f.iter_mut() {
                *t = r * &*t;
            }
        }
        for nn in &mut s.normals {
            for x in nn.iter_mut() {
                *x = r * &*x;
            }
        }
        s
    }
}

fn fd_vector<'a>(line: impl Fn(usize) -> &'a DVector<f64>, n: usize, h: f64, k: usize) -> DVector<f64> {
    let c = |a: usize, b: usize, w: [f64; 3], off: usize| {
        (line(off) * w[0] + line(a) * w[1] + line(b) * w[2]) / h
    };
    if k == 0 {
        c(1, 2, [-1.5, 2.0, -0.5], 0)
    } else if k == n - 1 {
        c(n - 2, n - 3, [1.5, -2.0, 0.5], n - 1)
    } else {
        (line(k + 1) - line(k - 1)) / (2.0 * h)
    }
}

/// Rotation and translation minimising `sum |r x + c - y|^2`.
#[derive(Debug, Clone)]
pub struct RigidFit {
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
    /// `max |r x + c - y|` over the points.
    pub max_error: f64,
}

/// Orthogonal Procrustes with determinant `+1`; `x` and `y` must have the
/// same dimension, pad with zeros beforehand.
pub fn rigid_fit(x: &[DVector<f64>], y: &[DVector<f64>]) -> Result<RigidFit> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::ShapeMismatch(format!("{} vs {} points", x.len(), y.len())));
    }
    let m = x[0].len();
    if y[0].len() != m {
        return Err(Error::ShapeMismatch(format!("dimension {m} vs {}", y[0].len())));
    }
    let n = x.len() as f64;
    let cx = x.iter().fold(DVector::zeros(m), |a, p| a + p) / n;
    let cy = y.iter().fold(DVector::zeros(m), |a, p| a + p) / n;
    let mut h = DMatrix::zeros(m, m);
    for (p, q) in x.iter().zip(y) {
        h += (q - &cy) * (p - &cx).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut d = DMatrix::identity(m, m);
    if (&u * &vt).determinant() < 0.0 {
        d[(m - 1, m - 1)] = -1.0;
    }
    let rotation = &u * d * &vt;
    let translation = &cy - &rotation * &cx;
    let max_error = x
        .iter()
        .zip(y)
        .map(|(p, q)| (&rotation * p + &translation - q).norm())
        .fold(0.0, f64::max);
    Ok(RigidFit { rotation, translation, max_error })
}

/// Pads a vector with zeros to dimension `m`.
pub fn pad(x: &DVector<f64>, m: usize) -> DVector<f64> {
    let mut y = DVector::zeros(m);
    y.rows_mut(0, x.len()).copy_from(x);
    y
}
