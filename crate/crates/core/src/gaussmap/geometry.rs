//! Intrinsic and extrinsic geometry of a Gauss-image chart.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::patch::SurfacePatch;
use crate::chart::grid::{dot, norm, ComplexField, Grid2, Matrix2Field, ScalarField, VectorField};
use crate::error::{Error, Result};

/// Christoffel symbols `Gamma^k_ij` of the induced metric; `[k]` selects the
/// upper index (0 = u, 1 = v).
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub uu: [ScalarField; 2],
    pub uv: [ScalarField; 2],
    pub vv: [ScalarField; 2],
}

#[derive(Debug, Clone)]
pub struct ChartGeometry {
    pub grid: Grid2,
    pub ambient: usize,
    pub e: ScalarField,
    pub f: ScalarField,
    pub g: ScalarField,
    pub christoffel: Christoffel,
    /// Orthonormal frame of the normal bundle of the chart inside `T S^n`.
    pub normals: Vec<VectorField>,
    /// Second fundamental form components in the `normals` frame.
    pub alpha_uu: VectorField,
    pub alpha_uv: VectorField,
    pub alpha_vv: VectorField,
    /// Complex coefficient of `nabla_{d_z} d_zbar` for the complex coordinate
    /// `z = u + i v`.
    pub gamma_c: ComplexField,
    /// Zeroth-order coefficient of the complex form of `Q`.
    pub f_c: ScalarField,
    pub patch: Option<SurfacePatch>,
}

impl ChartGeometry {
    /// `Gamma^u` of `nabla_{d_u} d_v`.
    pub fn gamma_u(&self) -> &ScalarField {
        &self.christoffel.uv[0]
    }

    /// `Gamma^v` of `nabla_{d_u} d_v`.
    pub fn gamma_v(&self) -> &ScalarField {
        &self.christoffel.uv[1]
    }

    /// Conformal exponent `lambda = ln(E) / 2`.
    pub fn lambda(&self) -> ScalarField {
        self.e.map(|x| 0.5 * x.ln())
    }

    pub fn metric_at(&self, i: usize, j: usize) -> Matrix2<f64> {
        let f = *self.f.at(i, j);
        Matrix2::new(*self.e.at(i, j), f, f, *self.g.at(i, j))
    }

    /// Coefficients of a real operator `Q` without an underlying surface:
    /// `E = G = 1`, `F` as given (|F| < 1), and only `Gamma^k_uv` non-zero.
    pub fn with_hyperbolic_coefficients(
        gamma_u: ScalarField,
        gamma_v: ScalarField,
        f: ScalarField,
    ) -> Result<Self> {
        let grid = gamma_u.grid;
        gamma_v.same_grid(&gamma_u, "Gamma^v")?;
        f.same_grid(&gamma_u, "F")?;
        let z = ScalarField::zeros(grid);
        let one = ScalarField::filled(grid, 1.0);
        let geom = ChartGeometry {
            grid,
            ambient: 0,
            e: one.clone(),
            g: one,
            christoffel: Christoffel {
                uu: [z.clone(), z.clone()],
                uv: [gamma_u, gamma_v],
                vv: [z.clone(), z.clone()],
            },
            f,
            normals: Vec::new(),
            alpha_uu: VectorField::zeros(grid, 0),
            alpha_uv: VectorField::zeros(grid, 0),
            alpha_vv: VectorField::zeros(grid, 0),
            gamma_c: ComplexField::filled(grid, Complex64::new(0.0, 0.0)),
            f_c: ScalarField::filled(grid, 0.5),
            patch: None,
        };
        geom.check_metric()?;
        Ok(geom)
    }

    /// Coefficients of a complex operator `Q` without an underlying surface.
    pub fn with_elliptic_coefficients(gamma_c: ComplexField, f_c: ScalarField) -> Result<Self> {
        let grid = gamma_c.grid;
        f_c.same_grid(&gamma_c, "F")?;
        let z = ScalarField::zeros(grid);
        let mut geom = ChartGeometry::with_hyperbolic_coefficients(z.clone(), z.clone(), z)?;
        geom.gamma_c = gamma_c;
        geom.f_c = f_c;
        Ok(geom)
    }

    fn check_metric(&self) -> Result<()> {
        for i in 0..self.grid.nu {
            for j in 0..self.grid.nv {
                let (e, f, g) = (*self.e.at(i, j), *self.f.at(i, j), *self.g.at(i, j));
                let det = e * g - f * f;
                if !(e > 0.0 && g > 0.0 && det > 1e-14 * e * g) {
                    return Err(Error::DegenerateMetric { node: (i, j), det });
                }
            }
        }
        Ok(())
    }

    /// Covariant Hessian `theta_ij - Gamma^k_ij theta_k` from the partials of
    /// `theta`.
    pub fn hessian(
        &self,
        du: &ScalarField,
        dv: &ScalarField,
        duu: &ScalarField,
        duv: &ScalarField,
        dvv: &ScalarField,
    ) -> Matrix2Field {
        let c = &self.christoffel;
        Matrix2Field::from_nodes(self.grid, |i, j| {
            let (tu, tv) = (*du.at(i, j), *dv.at(i, j));
            let h = |d2: &ScalarField, gk: &[ScalarField; 2]| {
                d2.at(i, j) - gk[0].at(i, j) * tu - gk[1].at(i, j) * tv
            };
            let huv = h(duv, &c.uv);
            Matrix2::new(h(duu, &c.uu), huv, huv, h(dvv, &c.vv))
        })
    }

    /// Gauss formula defect
    /// `|h_ij - Gamma^k_ij h_k + g_ij h - sum_a alpha_ij^a e_a|`, maximised over
    /// the three index pairs at each node.
    pub fn gauss_formula_residual(&self) -> Option<ScalarField> {
        let p = self.patch.as_ref()?;
        let c = &self.christoffel;
        Some(ScalarField::from_nodes(self.grid, |i, j| {
            let mut worst = 0.0_f64;
            for (d2, gk, gij, al) in [
                (&p.duu, &c.uu, &self.e, &self.alpha_uu),
                (&p.duv, &c.uv, &self.f, &self.alpha_uv),
                (&p.dvv, &c.vv, &self.g, &self.alpha_vv),
            ] {
                let mut r = d2.at(i, j).to_vec();
                for (a, x) in r.iter_mut().enumerate() {
                    *x += -gk[0].at(i, j) * p.du.at(i, j)[a] - gk[1].at(i, j) * p.dv.at(i, j)[a]
                        + gij.at(i, j) * p.pos.at(i, j)[a];
                    for (k, n) in self.normals.iter().enumerate() {
                        *x -= al.at(i, j)[k] * n.at(i, j)[a];
                    }
                }
                worst = worst.max(norm(&r));
            }
            worst
        }))
    }

    /// Largest deviation of the normal frame from orthonormality and from
    /// orthogonality to `h, h_u, h_v`.
    pub fn frame_defect(&self) -> f64 {
        let Some(p) = self.patch.as_ref() else {
            return 0.0;
        };
        let mut worst = 0.0_f64;
        for i in 0..self.grid.nu {
            for j in 0..self.grid.nv {
                for (a, ea) in self.normals.iter().enumerate() {
                    let x = ea.at(i, j);
                    for (b, eb) in self.normals.iter().enumerate() {
                        let want = if a == b { 1.0 } else { 0.0 };
                        worst = worst.max((dot(x, eb.at(i, j)) - want).abs());
                    }
                    for t in [&p.pos, &p.du, &p.dv] {
                        worst = worst.max(dot(x, t.at(i, j)).abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn build_geometry(patch: &SurfacePatch) -> Result<ChartGeometry> {
    patch.validate()?;
    if patch.ambient < 4 {
        return Err(Error::Unsupported(format!(
            "Gauss image in S^{} has no normal bundle",
            patch.ambient - 1
        )));
    }
    let grid = patch.grid;
    let m = patch.ambient;
    let nn = m - 3;
    let at = |f: &VectorField, i: usize, j: usize| f.at(i, j).to_vec();

    let e = ScalarField::from_nodes(grid, |i, j| dot(patch.du.at(i, j), patch.du.at(i, j)));
    let f = ScalarField::from_nodes(grid, |i, j| dot(patch.du.at(i, j), patch.dv.at(i, j)));
    let g = ScalarField::from_nodes(grid, |i, j| dot(patch.dv.at(i, j), patch.dv.at(i, j)));

    let pivots = pivot_order(patch, grid.nu / 2, grid.nv / 2);

    let mut chr = [
        [ScalarField::zeros(grid), ScalarField::zeros(grid)],
        [ScalarField::zeros(grid), ScalarField::zeros(grid)],
        [ScalarField::zeros(grid), ScalarField::zeros(grid)],
    ];
    let mut normals = vec![VectorField::zeros(grid, m); nn];
    let mut alpha = [
        VectorField::zeros(grid, nn),
        VectorField::zeros(grid, nn),
        VectorField::zeros(grid, nn),
    ];

    for i in 0..grid.nu {
        for j in 0..grid.nv {
            let (ee, ff, gg) = (*e.at(i, j), *f.at(i, j), *g.at(i, j));
            let det = ee * gg - ff * ff;
            if !(ee > 0.0 && gg > 0.0 && det > 1e-14 * ee * gg) {
                return Err(Error::DegenerateMetric { node: (i, j), det });
            }
            let hu = at(&patch.du, i, j);
            let hv = at(&patch.dv, i, j);
            for (s, d2) in [&patch.duu, &patch.duv, &patch.dvv].into_iter().enumerate() {
                let x = d2.at(i, j);
                let (pu, pv) = (dot(x, &hu), dot(x, &hv));
                *chr[s][0].at_mut(i, j) = (gg * pu - ff * pv) / det;
                *chr[s][1].at_mut(i, j) = (ee * pv - ff * pu) / det;
            }
            let frame = normal_frame(&at(&patch.pos, i, j), &hu, &hv, &pivots);
            for (k, nk) in frame.iter().enumerate() {
                normals[k].at_mut(i, j).copy_from_slice(nk);
                for (s, d2) in [&patch.duu, &patch.duv, &patch.dvv].into_iter().enumerate() {
                    alpha[s].at_mut(i, j)[k] = dot(d2.at(i, j), nk);
                }
            }
        }
    }

    let [uu, uv, vv] = chr;
    let gamma_c = ComplexField::from_nodes(grid, |i, j| {
        Complex64::new(
            0.25 * (uu[0].at(i, j) + vv[0].at(i, j)),
            0.25 * (uu[1].at(i, j) + vv[1].at(i, j)),
        )
    });
    let f_c = e.zip_map(&g, |a, b| 0.25 * (a + b));
    let [alpha_uu, alpha_uv, alpha_vv] = alpha;
    Ok(ChartGeometry {
        grid,
        ambient: m,
        e,
        f,
        g,
        christoffel: Christoffel { uu, uv, vv },
        normals,
        alpha_uu,
        alpha_uv,
        alpha_vv,
        gamma_c,
        f_c,
        patch: Some(patch.clone()),
    })
}

/// Orthonormal basis of the span of `vs` by modified Gram-Schmidt.
fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for q in &out {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let r = norm(&w);
        w.iter_mut().for_each(|x| *x /= r);
        out.push(w);
    }
    out
}

fn residual_against(q: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut w = v.to_vec();
    for b in q {
        let c = dot(&w, b);
        w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    w
}

fn unit(m: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[k] = 1.0;
    e
}

/// Ambient basis vectors in greedy largest-residual order at one node; the
/// order is then used at every node.
fn pivot_order(patch: &SurfacePatch, i: usize, j: usize) -> Vec<usize> {
    let m = patch.ambient;
    let mut q = orthonormalize(&[
        patch.pos.at(i, j).to_vec(),
        patch.du.at(i, j).to_vec(),
        patch.dv.at(i, j).to_vec(),
    ]);
    let mut order = Vec::new();
    while order.len() < m - 3 {
        let best = (0..m)
            .filter(|k| !order.contains(k))
            .map(|k| (k, norm(&residual_against(&q, &unit(m, k)))))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0;
        order.push(best);
        q = orthonormalize(&[q, vec![unit(m, best)]].concat());
    }
    order
}

fn normal_frame(h: &[f64], hu: &[f64], hv: &[f64], pivots: &[usize]) -> Vec<Vec<f64>> {
    let m = h.len();
    if m == 4 {
        // The generalized cross product is smooth wherever the chart is
        // immersed.
        let mut n = cross4(h, hu, hv);
        let r = norm(&n);
        n.iter_mut().for_each(|x| *x /= r);
        return vec![n];
    }
    let mut vs = vec![h.to_vec(), hu.to_vec(), hv.to_vec()];
    vs.extend(pivots.iter().map(|k| unit(m, *k)));
    orthonormalize(&vs).split_off(3)
}

/// Vector orthogonal to `a, b, c` in `R^4` with `det[a, b, c, n] > 0`.
fn cross4(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_fn(3, 4, |r, k| [a, b, c][r][k]);
    (0..4)
        .map(|k| {
            let cols: Vec<usize> = (0..4).filter(|x| *x != k).collect();
            let minor = m.select_columns(&cols).determinant();
            // Cofactor expansion along the last row of [a; b; c; n].
            if (k + 3) % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
        .collect()
}
