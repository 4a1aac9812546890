//! Support functions `gamma` with `Q(gamma) = 0`.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use super::q::q_apply_with;
use crate::chart::fd::partials;
use crate::chart::goursat::solve_goursat;
use crate::chart::grid::{Field, Grid2, Matrix2Field, ScalarField, DEFAULT_BAND};
use crate::error::{Error, Result};
use crate::gaussmap::ChartGeometry;

#[derive(Debug, Clone)]
pub struct SupportFunction {
    pub gamma: ScalarField,
    pub du: ScalarField,
    pub dv: ScalarField,
    pub duu: ScalarField,
    pub duv: ScalarField,
    pub dvv: ScalarField,
    /// Covariant Hessian for the metric of the chart.
    pub hess: Matrix2Field,
    /// Contravariant gradient components `g^{-1} (gamma_u, gamma_v)`.
    pub grad: Field<Vector2<f64>>,
}

impl SupportFunction {
    /// Partials by finite differences, then Hessian and gradient.
    pub fn from_field(geom: &ChartGeometry, gamma: ScalarField) -> Result<Self> {
        gamma.same_grid(&geom.e, "gamma")?;
        gamma.check_finite("gamma")?;
        let p = partials(&gamma)?;
        let hess = geom.hessian(&p.du, &p.dv, &p.duu, &p.duv, &p.dvv);
        let grad = Field::from_nodes(geom.grid, |i, j| {
            let g = geom.metric_at(i, j);
            let inv = g.try_inverse().unwrap_or_else(Matrix2::zeros);
            inv * Vector2::new(*p.du.at(i, j), *p.dv.at(i, j))
        });
        Ok(SupportFunction {
            gamma,
            du: p.du,
            dv: p.dv,
            duu: p.duu,
            duv: p.duv,
            dvv: p.dvv,
            hess,
            grad,
        })
    }

    pub fn grid(&self) -> Grid2 {
        self.gamma.grid
    }
}

/// Solves `Q(gamma) = 0` with `gamma(u, v0) = a(u)` and `gamma(u0, v) = b(v)`.
pub fn support_solve(geom: &ChartGeometry, a: &[f64], b: &[f64]) -> Result<SupportFunction> {
    let gamma = solve_goursat(geom.gamma_u(), geom.gamma_v(), &geom.f, a, b, geom.grid)?;
    SupportFunction::from_field(geom, gamma)
}

/// `gamma = nu(v) e^{lambda}` with `e^{lambda} = sqrt(E)`.
pub fn warped_support(geom: &ChartGeometry, nu: &[f64]) -> Result<SupportFunction> {
    if nu.len() != geom.grid.nv {
        return Err(Error::ShapeMismatch(format!(
            "nu has {} samples for {} nodes along v",
            nu.len(),
            geom.grid.nv
        )));
    }
    let gamma = ScalarField::from_nodes(geom.grid, |i, j| nu[j] * geom.e.at(i, j).sqrt());
    SupportFunction::from_field(geom, gamma)
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportCheck {
    pub pass: bool,
    pub max_residual: f64,
    pub node: (usize, usize),
    pub tol: f64,
    /// Max of `|H_uv - H_vu|`; zero by construction.
    pub hessian_asymmetry: f64,
}

/// `max |Q(gamma)|` over the interior band against `tol`.
pub fn support_check(geom: &ChartGeometry, s: &SupportFunction, tol: f64) -> SupportCheck {
    let q = q_apply_with(geom, &s.gamma, &s.du, &s.dv, &s.duv);
    let m = q.max_abs(DEFAULT_BAND);
    let hessian_asymmetry = s
        .hess
        .data
        .iter()
        .map(|h| (h[(0, 1)] - h[(1, 0)]).abs())
        .fold(0.0, f64::max);
    SupportCheck {
        pass: m.value <= tol,
        max_residual: m.value,
        node: m.node,
        tol,
        hessian_asymmetry,
    }
}
