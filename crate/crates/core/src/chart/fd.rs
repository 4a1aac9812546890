//! Second-order finite differences and cumulative trapezoid quadrature.
//!
//! Interior nodes use central stencils; the first and last node of each line
//! use second-order one-sided stencils. The mixed
//! derivative is always `diff_u(diff_v(f))`.

use std::ops::{Add, Mul, Sub};

use super::grid::{Field, Grid2};
use crate::error::{Error, Result};

/// Values that the difference stencils can act on.
pub trait Stencil: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Stencil for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    U,
    V,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::U => "u",
            Axis::V => "v",
        }
    }
}

/// First derivative at position `k` of a line of `n >= 3` samples spaced `h`.
#[inline]
pub fn d1_line<T: Stencil>(f: impl Fn(usize) -> T, n: usize, h: f64, k: usize) -> T {
    if k == 0 {
        (f(1) * 4.0 - f(0) * 3.0 - f(2)) * (0.5 / h)
    } else if k + 1 == n {
        (f(n - 1) * 3.0 - f(n - 2) * 4.0 + f(n - 3)) * (0.5 / h)
    } else {
        (f(k + 1) - f(k - 1)) * (0.5 / h)
    }
}

/// Second derivative at position `k` of a line of `n >= 4` samples.
#[inline]
pub fn d2_line<T: Stencil>(f: impl Fn(usize) -> T, n: usize, h: f64, k: usize) -> T {
    let inv = 1.0 / (h * h);
    let end = |a: usize, b: usize, c: usize, d: usize| (f(a) * 2.0 - f(b) * 5.0 + f(c) * 4.0 - f(d)) * inv;
    if k == 0 {
        end(0, 1, 2, 3)
    } else if k + 1 == n {
        end(n - 1, n - 2, n - 3, n - 4)
    } else {
        (f(k + 1) - f(k) * 2.0 + f(k - 1)) * inv
    }
}

fn check_width(grid: &Grid2, axis: Axis, needed: usize) -> Result<()> {
    let nodes = match axis {
        Axis::U => grid.nu,
        Axis::V => grid.nv,
    };
    if nodes < needed {
        return Err(Error::GridTooSmall {
            axis: axis.name(),
            nodes,
            needed,
        });
    }
    Ok(())
}

pub fn diff<T: Stencil>(f: &Field<T>, axis: Axis) -> Result<Field<T>> {
    let g = f.grid;
    check_width(&g, axis, 3)?;
    Ok(match axis {
        Axis::U => Field::from_nodes(g, |i, j| d1_line(|k| *f.at(k, j), g.nu, g.hu, i)),
        Axis::V => Field::from_nodes(g, |i, j| d1_line(|k| *f.at(i, k), g.nv, g.hv, j)),
    })
}

pub fn diff2<T: Stencil>(f: &Field<T>, axis: Axis) -> Result<Field<T>> {
    let g = f.grid;
    check_width(&g, axis, 4)?;
    Ok(match axis {
        Axis::U => Field::from_nodes(g, |i, j| d2_line(|k| *f.at(k, j), g.nu, g.hu, i)),
        Axis::V => Field::from_nodes(g, |i, j| d2_line(|k| *f.at(i, k), g.nv, g.hv, j)),
    })
}

pub fn diff_u<T: Stencil>(f: &Field<T>) -> Result<Field<T>> {
    diff(f, Axis::U)
}

pub fn diff_v<T: Stencil>(f: &Field<T>) -> Result<Field<T>> {
    diff(f, Axis::V)
}

/// Mixed derivative, composed as `diff_u(diff_v(f))`.
pub fn diff_uv<T: Stencil>(f: &Field<T>) -> Result<Field<T>> {
    diff_u(&diff_v(f)?)
}

pub fn diff_uu<T: Stencil>(f: &Field<T>) -> Result<Field<T>> {
    diff2(f, Axis::U)
}

pub fn diff_vv<T: Stencil>(f: &Field<T>) -> Result<Field<T>> {
    diff2(f, Axis::V)
}

/// All first and second partials of a field, in the order
/// `(f_u, f_v, f_uu, f_uv, f_vv)`.
pub struct Partials<T> {
    pub du: Field<T>,
    pub dv: Field<T>,
    pub duu: Field<T>,
    pub duv: Field<T>,
    pub dvv: Field<T>,
}

pub fn partials<T: Stencil>(f: &Field<T>) -> Result<Partials<T>> {
    let dv = diff_v(f)?;
    Ok(Partials {
        du: diff_u(f)?,
        duv: diff_u(&dv)?,
        dv,
        duu: diff_uu(f)?,
        dvv: diff_vv(f)?,
    })
}

/// True when the node's derivative along some axis used a one-sided stencil.
pub fn is_one_sided(grid: &Grid2, i: usize, j: usize) -> bool {
    grid.in_band(i, j, 1)
}

/// Cumulative trapezoid integral along `axis`, anchored on the grid line where
/// the integration coordinate is 0. Values on the negative side carry the
/// sign of the oriented integral.
pub fn cumint<T: Stencil>(f: &Field<T>, axis: Axis) -> Result<Field<T>> {
    let g = f.grid;
    let (origin, n, h) = match axis {
        Axis::U => (g.zero_line_u(), g.nu, g.hu),
        Axis::V => (g.zero_line_v(), g.nv, g.hv),
    };
    let k0 = origin.ok_or(Error::OriginNotOnGrid {
        axis: axis.name(),
        coordinate: match axis {
            Axis::U => g.u0,
            Axis::V => g.v0,
        },
    })?;
    let lines = match axis {
        Axis::U => g.nv,
        Axis::V => g.nu,
    };
    let get = |line: usize, k: usize| match axis {
        Axis::U => *f.at(k, line),
        Axis::V => *f.at(line, k),
    };
    let zero = f.data[0] * 0.0;
    let mut out = Field::filled(g, zero);
    for line in 0..lines {
        let mut acc = zero;
        let mut put = |k: usize, val: T| match axis {
            Axis::U => *out.at_mut(k, line) = val,
            Axis::V => *out.at_mut(line, k) = val,
        };
        put(k0, zero);
        for k in k0 + 1..n {
            acc = acc + (get(line, k - 1) + get(line, k)) * (0.5 * h);
            put(k, acc);
        }
        acc = zero;
        for k in (0..k0).rev() {
            acc = acc - (get(line, k) + get(line, k + 1)) * (0.5 * h);
            put(k, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::ScalarField;

    fn unit(n: usize) -> Grid2 {
        Grid2::square(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn linear_field_has_unit_u_derivative() {
        let g = unit(16);
        let f = ScalarField::from_fn(g, |u, _| u);
        let d = diff_u(&f).unwrap();
        for x in &d.data {
            assert!((x - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn bilinear_field_has_unit_mixed_derivative() {
        let g = Grid2::new(-0.3, 0.9, 11, 0.2, 1.7, 13).unwrap();
        let f = ScalarField::from_fn(g, |u, v| u * v);
        let d = diff_uv(&f).unwrap();
        for x in &d.data {
            assert!((x - 1.0).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn mixed_derivative_order_is_symmetric_to_rounding() {
        let g = unit(24);
        let f = ScalarField::from_fn(g, |u, v| (3.0 * u).sin() * (v * v).exp());
        let a = diff_u(&diff_v(&f).unwrap()).unwrap();
        let b = diff_v(&diff_u(&f).unwrap()).unwrap();
        // Rounding of both compositions is amplified by 1 / (hu hv).
        let scale = f.scale() / (g.hu * g.hv);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() <= 8.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn second_derivatives_are_exact_on_quadratics() {
        let g = unit(10);
        let f = ScalarField::from_fn(g, |u, v| 3.0 * u * u - v * v + u * v);
        let duu = diff_uu(&f).unwrap();
        let dvv = diff_vv(&f).unwrap();
        for (a, b) in duu.data.iter().zip(&dvv.data) {
            assert!((a - 6.0).abs() < 1e-9 && (b + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_narrow_grid_is_rejected() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let f = ScalarField::zeros(g);
        assert!(diff_u(&f).is_ok());
        let tiny = Grid2 { nu: 2, ..g };
        let f = Field {
            grid: tiny,
            data: vec![0.0; tiny.len()],
        };
        assert!(matches!(
            diff_u(&f),
            Err(Error::GridTooSmall { axis: "u", .. })
        ));
    }

    #[test]
    fn cumint_of_zero_is_zero() {
        let g = unit(9);
        let out = cumint(&ScalarField::zeros(g), Axis::V).unwrap();
        assert!(out.data.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn cumint_of_one_is_the_coordinate() {
        let g = unit(9);
        let out = cumint(&ScalarField::filled(g, 1.0), Axis::V).unwrap();
        for i in 0..g.nu {
            for j in 0..g.nv {
                assert!((out.at(i, j) - g.v(j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cumint_is_exact_on_affine_integrands() {
        let g = Grid2::new(0.0, 1.0, 8, -1.0, 2.0, 31).unwrap();
        let f = ScalarField::from_fn(g, |_, v| v);
        let out = cumint(&f, Axis::V).unwrap();
        for j in 0..g.nv {
            let v = g.v(j);
            let want = 0.5 * v * v;
            assert!((out.at(3, j) - want).abs() <= 4.0 * f64::EPSILON * (v * v).max(1.0));
        }
    }

    #[test]
    fn cumint_needs_origin_on_grid() {
        let g = Grid2::new(0.1, 1.0, 8, 0.0, 1.0, 8).unwrap();
        assert!(matches!(
            cumint(&ScalarField::zeros(g), Axis::U),
            Err(Error::OriginNotOnGrid { axis: "u", .. })
        ));
        assert!(cumint(&ScalarField::zeros(g), Axis::V).is_ok());
    }
}
