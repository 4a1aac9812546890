use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Node, Result};

/// Smallest node count accepted along either axis.
pub const MIN_NODES: usize = 8;

/// Width of the boundary band excluded from residual maxima by default.
pub const DEFAULT_BAND: usize = 2;

/// Uniform tensor grid on the chart `[u0, u1] x [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub nu: usize,
    pub nv: usize,
    pub hu: f64,
    pub hv: f64,
}

impl Grid2 {
    pub fn new(u0: f64, u1: f64, nu: usize, v0: f64, v1: f64, nv: usize) -> Result<Self> {
        if nu < MIN_NODES || nv < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes per axis, got {nu}x{nv}"
            )));
        }
        if !(u0.is_finite() && u1.is_finite() && v0.is_finite() && v1.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if u1 <= u0 || v1 <= v0 {
            return Err(Error::InvalidGrid(format!(
                "empty chart [{u0}, {u1}] x [{v0}, {v1}]"
            )));
        }
        Ok(Grid2 {
            u0,
            u1,
            v0,
            v1,
            nu,
            nv,
            hu: (u1 - u0) / (nu - 1) as f64,
            hv: (v1 - v0) / (nv - 1) as f64,
        })
    }

    /// Square chart `[lo, hi]^2` with `n` nodes per axis.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid2::new(lo, hi, n, lo, hi, n)
    }

    /// Same chart with `2(n-1)+1` nodes per axis, so every old node survives.
    pub fn refined(&self) -> Self {
        Grid2::new(
            self.u0,
            self.u1,
            2 * (self.nu - 1) + 1,
            self.v0,
            self.v1,
            2 * (self.nv - 1) + 1,
        )
        .expect("refining a valid grid")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    #[inline]
    pub fn node_of(&self, k: usize) -> Node {
        (k / self.nv, k % self.nv)
    }

    #[inline]
    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.hu
    }

    #[inline]
    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.hv
    }

    /// `h^2` budget used by the O(h^2) tolerances: `hu^2 + hv^2`.
    pub fn h2(&self) -> f64 {
        self.hu * self.hu + self.hv * self.hv
    }

    pub fn hmax(&self) -> f64 {
        self.hu.max(self.hv)
    }

    /// True when the node lies within `band` nodes of the boundary.
    pub fn in_band(&self, i: usize, j: usize, band: usize) -> bool {
        i < band || j < band || i + band >= self.nu || j + band >= self.nv
    }

    /// Index of the grid line at coordinate 0 along `u`, if any.
    pub fn zero_line_u(&self) -> Option<usize> {
        zero_line(self.u0, self.hu, self.nu)
    }

    pub fn zero_line_v(&self) -> Option<usize> {
        zero_line(self.v0, self.hv, self.nv)
    }
}

fn zero_line(x0: f64, h: f64, n: usize) -> Option<usize> {
    let k = (-x0 / h).round();
    if k < 0.0 || k >= n as f64 {
        return None;
    }
    let x = x0 + k * h;
    if x.abs() <= 1e-12 * (1.0 + x0.abs()) {
        Some(k as usize)
    } else {
        None
    }
}

/// One value per node of a [`Grid2`], stored `u`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub grid: Grid2,
    pub data: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<Complex64>;
pub type Matrix2Field = Field<Matrix2<f64>>;
pub type ComplexMatrix2Field = Field<Matrix2<Complex64>>;

impl<T: Clone> Field<T> {
    pub fn filled(grid: Grid2, value: T) -> Self {
        Field {
            grid,
            data: vec![value; grid.len()],
        }
    }
}

impl<T> Field<T> {
    pub fn from_fn(grid: Grid2, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.nu {
            let u = grid.u(i);
            for j in 0..grid.nv {
                data.push(f(u, grid.v(j)));
            }
        }
        Field { grid, data }
    }

    pub fn from_nodes(grid: Grid2, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                data.push(f(i, j));
            }
        }
        Field { grid, data }
    }

    pub fn from_vec(grid: Grid2, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} grid",
                data.len(),
                grid.nu,
                grid.nv
            )));
        }
        Ok(Field { grid, data })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        let k = self.grid.idx(i, j);
        &mut self.data[k]
    }

    pub fn map<S>(&self, f: impl FnMut(&T) -> S) -> Field<S> {
        Field {
            grid: self.grid,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<S, R>(&self, other: &Field<S>, mut f: impl FnMut(&T, &S) -> R) -> Field<R> {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn same_grid<S>(&self, other: &Field<S>, what: &str) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("{what}: fields on different grids")))
        }
    }
}

/// Location and magnitude of a field maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxAt {
    pub value: f64,
    pub node: Node,
}

impl MaxAt {
    pub const ZERO: MaxAt = MaxAt {
        value: 0.0,
        node: (0, 0),
    };
}

impl<T> Field<T> {
    /// Maximum of `norm` over nodes outside the boundary band of width `band`.
    /// Ties keep the first node in storage order, so maxima are reproducible.
    pub fn max_by(&self, band: usize, mut norm: impl FnMut(&T) -> f64) -> MaxAt {
        let g = self.grid;
        let mut best = MaxAt::ZERO;
        let mut seen = false;
        for i in 0..g.nu {
            for j in 0..g.nv {
                if g.in_band(i, j, band) {
                    continue;
                }
                let x = norm(self.at(i, j));
                if !seen || x > best.value || x.is_nan() {
                    best = MaxAt {
                        value: x,
                        node: (i, j),
                    };
                    seen = true;
                    if x.is_nan() {
                        return best;
                    }
                }
            }
        }
        best
    }

    /// Minimum of `norm` over nodes outside the band; NaN wins as in `max_by`.
    pub fn min_by(&self, band: usize, mut norm: impl FnMut(&T) -> f64) -> MaxAt {
        let m = self.max_by(band, |x| -norm(x));
        MaxAt {
            value: -m.value,
            node: m.node,
        }
    }
}

impl ScalarField {
    pub fn zeros(grid: Grid2) -> Self {
        Field::filled(grid, 0.0)
    }

    pub fn max_abs(&self, band: usize) -> MaxAt {
        self.max_by(band, |x| x.abs())
    }

    /// Largest absolute value over every node.
    pub fn scale(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                what: what.to_string(),
                node: self.grid.node_of(k),
            }),
        }
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|a| a * s)
    }
}

impl ComplexField {
    pub fn check_finite(&self, what: &str) -> Result<()> {
        match self
            .data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                what: what.to_string(),
                node: self.grid.node_of(k),
            }),
        }
    }

    pub fn re(&self) -> ScalarField {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|z| z.im)
    }

    pub fn from_parts(re: &ScalarField, im: &ScalarField) -> ComplexField {
        re.zip_map(im, |a, b| Complex64::new(*a, *b))
    }
}

/// Flat storage of a vector of length `dim` per node (ambient vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid2,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid2, dim: usize) -> Self {
        VectorField {
            grid,
            dim,
            data: vec![0.0; grid.len() * dim],
        }
    }

    pub fn from_fn(grid: Grid2, dim: usize, mut f: impl FnMut(f64, f64, &mut [f64])) -> Self {
        let mut out = VectorField::zeros(grid, dim);
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                let (u, v) = (grid.u(i), grid.v(j));
                f(u, v, out.at_mut(i, j));
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let k = self.grid.idx(i, j) * self.dim;
        &self.data[k..k + self.dim]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = self.grid.idx(i, j) * self.dim;
        &mut self.data[k..k + self.dim]
    }

    /// Component `a` as a scalar field.
    pub fn component(&self, a: usize) -> ScalarField {
        Field::from_nodes(self.grid, |i, j| self.at(i, j)[a])
    }

    pub fn from_components(comps: &[ScalarField]) -> Result<Self> {
        let first = comps
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no components".into()))?;
        let grid = first.grid;
        let dim = comps.len();
        let mut out = VectorField::zeros(grid, dim);
        for (a, c) in comps.iter().enumerate() {
            c.same_grid(first, "vector components")?;
            for i in 0..grid.nu {
                for j in 0..grid.nv {
                    out.at_mut(i, j)[a] = *c.at(i, j);
                }
            }
        }
        Ok(out)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Three-dimensional grid over `(u, v, t)`; `t` runs along the nullity ruling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub base: Grid2,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
    pub ht: f64,
}

impl Grid3 {
    pub fn new(base: Grid2, t0: f64, t1: f64, nt: usize) -> Result<Self> {
        let single = nt == 1 && t0 == t1;
        if !single && (nt < 2 || t1 <= t0) || !(t0.is_finite() && t1.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "bad ruling range [{t0}, {t1}] with {nt} nodes"
            )));
        }
        Ok(Grid3 {
            base,
            t0,
            t1,
            nt,
            ht: if single { 0.0 } else { (t1 - t0) / (nt - 1) as f64 },
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.base.len() * self.nt
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.base.nv + j) * self.nt + k
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.ht
    }

    /// Index of the `t = 0` slice.
    pub fn zero_slice(&self) -> Option<usize> {
        if self.nt == 1 {
            return (self.t0 == 0.0).then_some(0);
        }
        zero_line(self.t0, self.ht, self.nt)
    }

    pub fn in_band(&self, i: usize, j: usize, band: usize) -> bool {
        self.base.in_band(i, j, band)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_coordinates_are_exact_multiples() {
        let g = Grid2::new(-1.0, 2.0, 13, 0.0, 1.0, 9).unwrap();
        assert_eq!(g.hu, 0.25);
        assert_eq!(g.u(4), -1.0 + 4.0 * 0.25);
        assert_eq!(g.v(8), 1.0);
        assert_eq!(g.zero_line_u(), Some(4));
        assert_eq!(g.zero_line_v(), Some(0));
    }

    #[test]
    fn rejects_small_and_empty_grids() {
        assert!(Grid2::new(0.0, 1.0, 7, 0.0, 1.0, 8).is_err());
        assert!(Grid2::new(1.0, 1.0, 8, 0.0, 1.0, 8).is_err());
    }

    #[test]
    fn refinement_keeps_old_nodes() {
        let g = Grid2::square(0.0, 1.0, 9).unwrap();
        let r = g.refined();
        assert_eq!(r.nu, 17);
        assert_eq!(r.u(2 * 3), g.u(3));
    }

    #[test]
    fn zero_line_absent_when_off_grid() {
        let g = Grid2::new(0.05, 1.0, 8, -0.5, 0.5, 10).unwrap();
        assert_eq!(g.zero_line_u(), None);
        assert_eq!(g.zero_line_v(), None);
    }

    #[test]
    fn band_maximum_skips_edges() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let mut f = ScalarField::zeros(g);
        *f.at_mut(0, 0) = 10.0;
        *f.at_mut(3, 4) = 2.0;
        let m = f.max_abs(2);
        assert_eq!(m.value, 2.0);
        assert_eq!(m.node, (3, 4));
        assert_eq!(f.max_abs(0).value, 10.0);
    }

    #[test]
    fn finite_check_reports_node() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let mut f = ScalarField::zeros(g);
        *f.at_mut(5, 6) = f64::NAN;
        match f.check_finite("probe") {
            Err(Error::NonFinite { node, .. }) => assert_eq!(node, (5, 6)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
