use std::path::Path;

use crate::chart::fd::{d1_line, d2_line};
use crate::chart::grid::{dot, norm, Grid2, VectorField};
use crate::error::{Error, Result};

pub const UNIT_TOL_ANALYTIC: f64 = 1e-10;
pub const UNIT_TOL_SAMPLED: f64 = 1e-8;

/// A chart of the Gauss image `h: L^2 -> S^n`, sampled with its first and
/// second partial derivatives at every node of the grid.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    pub name: String,
    pub grid: Grid2,
    /// Dimension `n + 1` of the ambient space of the sphere.
    pub ambient: usize,
    pub pos: VectorField,
    pub du: VectorField,
    pub dv: VectorField,
    pub duu: VectorField,
    pub duv: VectorField,
    pub dvv: VectorField,
    /// Derivatives come from closed forms rather than finite differences.
    pub analytic: bool,
}

/// Position and partial derivatives of `h` at one point.
#[derive(Debug, Clone, Default)]
pub struct Jet {
    pub pos: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub duu: Vec<f64>,
    pub duv: Vec<f64>,
    pub dvv: Vec<f64>,
}

impl SurfacePatch {
    /// Samples an analytic parametrization on the grid and checks the sphere
    /// invariants.
    pub fn analytic(
        name: &str,
        grid: Grid2,
        ambient: usize,
        mut jet: impl FnMut(f64, f64) -> Jet,
    ) -> Result<Self> {
        let mut p = SurfacePatch::empty(name, grid, ambient, true);
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                let x = jet(grid.u(i), grid.v(j));
                for (dst, src) in [
                    (&mut p.pos, &x.pos),
                    (&mut p.du, &x.du),
                    (&mut p.dv, &x.dv),
                    (&mut p.duu, &x.duu),
                    (&mut p.duv, &x.duv),
                    (&mut p.dvv, &x.dvv),
                ] {
                    if src.len() != ambient {
                        return Err(Error::ShapeMismatch(format!(
                            "jet component of length {} for ambient dimension {ambient}",
                            src.len()
                        )));
                    }
                    dst.at_mut(i, j).copy_from_slice(src);
                }
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// Builds a patch from sampled positions; derivatives are second-order
    /// finite differences projected onto the sphere's tangent bundle, so that
    /// `<h_i, h> = 0` and `<h_ij, h> = -<h_i, h_j>` hold exactly.
    pub fn sampled(name: &str, pos: VectorField) -> Result<Self> {
        let grid = pos.grid;
        let ambient = pos.dim;
        if grid.nu < 4 || grid.nv < 4 {
            return Err(Error::GridTooSmall {
                axis: "u/v",
                nodes: grid.nu.min(grid.nv),
                needed: 4,
            });
        }
        let mut p = SurfacePatch::empty(name, grid, ambient, false);
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                for a in 0..ambient {
                    let along_u = |k: usize| pos.at(k, j)[a];
                    let along_v = |k: usize| pos.at(i, k)[a];
                    p.du.at_mut(i, j)[a] = d1_line(along_u, grid.nu, grid.hu, i);
                    p.dv.at_mut(i, j)[a] = d1_line(along_v, grid.nv, grid.hv, j);
                    p.duu.at_mut(i, j)[a] = d2_line(along_u, grid.nu, grid.hu, i);
                    p.dvv.at_mut(i, j)[a] = d2_line(along_v, grid.nv, grid.hv, j);
                }
            }
        }
        // Mixed partial as the u-derivative of the v-derivative.
        let dv = p.dv.clone();
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                for a in 0..ambient {
                    p.duv.at_mut(i, j)[a] = d1_line(|k| dv.at(k, j)[a], grid.nu, grid.hu, i);
                }
            }
        }
        p.pos = pos;
        p.check_unit_norm()?;
        for i in 0..grid.nu {
            for j in 0..grid.nv {
                let h = p.pos.at(i, j).to_vec();
                let hh = dot(&h, &h);
                let du = project_tangent(p.du.at_mut(i, j), &h, hh);
                let dv = project_tangent(p.dv.at_mut(i, j), &h, hh);
                fix_second(p.duu.at_mut(i, j), &h, hh, dot(&du, &du));
                fix_second(p.duv.at_mut(i, j), &h, hh, dot(&du, &dv));
                fix_second(p.dvv.at_mut(i, j), &h, hh, dot(&dv, &dv));
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// Reads a point grid from CSV with columns `u,v,x1,...,x_m` and builds a
    /// sampled patch. An optional `t` column after `v` is accepted when it is
    /// constant.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let (grid, pos) = read_point_grid(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sampled".into());
        debug_assert_eq!(grid, pos.grid);
        SurfacePatch::sampled(&name, pos)
    }

    fn empty(name: &str, grid: Grid2, ambient: usize, analytic: bool) -> Self {
        let z = VectorField::zeros(grid, ambient);
        SurfacePatch {
            name: name.to_string(),
            grid,
            ambient,
            pos: z.clone(),
            du: z.clone(),
            dv: z.clone(),
            duu: z.clone(),
            duv: z.clone(),
            dvv: z,
            analytic,
        }
    }

    pub fn unit_tolerance(&self) -> f64 {
        if self.analytic {
            UNIT_TOL_ANALYTIC
        } else {
            UNIT_TOL_SAMPLED
        }
    }

    fn check_unit_norm(&self) -> Result<()> {
        let tol = self.unit_tolerance();
        for i in 0..self.grid.nu {
            for j in 0..self.grid.nv {
                let h = self.pos.at(i, j);
                if h.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite {
                        what: "patch position".into(),
                        node: (i, j),
                    });
                }
                let r = norm(h);
                if (r - 1.0).abs() > tol {
                    return Err(Error::PatchInvariant {
                        what: format!("|h| = {r}"),
                        node: (i, j),
                    });
                }
            }
        }
        Ok(())
    }

    /// Unit norm and tangency of the first derivatives.
    pub fn validate(&self) -> Result<()> {
        if self.ambient < 3 {
            return Err(Error::Unsupported(format!(
                "ambient dimension {} (need n + 1 >= 3)",
                self.ambient
            )));
        }
        self.check_unit_norm()?;
        let tol = self.unit_tolerance();
        for i in 0..self.grid.nu {
            for j in 0..self.grid.nv {
                let h = self.pos.at(i, j);
                let scale = 1.0 + norm(self.du.at(i, j)) + norm(self.dv.at(i, j));
                for (name, d) in [("<h_u, h>", &self.du), ("<h_v, h>", &self.dv)] {
                    let x = dot(d.at(i, j), h);
                    if x.abs() > tol * scale {
                        return Err(Error::PatchInvariant {
                            what: format!("{name} = {x}"),
                            node: (i, j),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn project_tangent(d: &mut [f64], h: &[f64], hh: f64) -> Vec<f64> {
    let c = dot(d, h) / hh;
    for (x, y) in d.iter_mut().zip(h) {
        *x -= c * y;
    }
    d.to_vec()
}

fn fix_second(d: &mut [f64], h: &[f64], hh: f64, gij: f64) {
    let c = (dot(d, h) + gij) / hh;
    for (x, y) in d.iter_mut().zip(h) {
        *x -= c * y;
    }
}

/// Reads a CSV point grid (`u,v[,t],x1..xm`) in storage order.
pub fn read_point_grid(path: &Path) -> Result<(Grid2, VectorField)> {
    let perr = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => perr(format!("{other:?}")),
    })?;
    let header = rdr.headers().map_err(|e| perr(e.to_string()))?.clone();
    if header.len() < 3 || &header[0] != "u" || &header[1] != "v" {
        return Err(perr("header must start with u,v".into()));
    }
    let skip = if &header[2] == "t" { 3 } else { 2 };
    let dim = header.len() - skip;
    if dim == 0 {
        return Err(perr("no coordinate columns".into()));
    }
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| perr(format!("short row {rec:?}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| perr(format!("{e} in row {rec:?}")))
        };
        us.push(num(0)?);
        vs.push(num(1)?);
        if skip == 3 {
            ts.push(num(2)?);
        }
        for k in skip..header.len() {
            xs.push(num(k)?);
        }
    }
    if ts.windows(2).any(|w| w[0] != w[1]) {
        return Err(perr("t column must be constant for a surface grid".into()));
    }
    let nv = vs.iter().position(|v| *v != vs[0]).map_or(0, |_| {
        us.iter().take_while(|u| **u == us[0]).count()
    });
    if nv == 0 || us.len() % nv != 0 {
        return Err(perr("rows do not form a u-major tensor grid".into()));
    }
    let nu = us.len() / nv;
    let grid = Grid2::new(us[0], us[us.len() - 1], nu, vs[0], vs[nv - 1], nv)?;
    for (k, (u, v)) in us.iter().zip(&vs).enumerate() {
        let (i, j) = grid.node_of(k);
        let tol = 1e-9 * (1.0 + u.abs().max(v.abs()));
        if (grid.u(i) - u).abs() > tol || (grid.v(j) - v).abs() > tol {
            return Err(perr(format!("row {k} is off the uniform grid")));
        }
    }
    Ok((
        grid,
        VectorField {
            grid,
            dim,
            data: xs,
        },
    ))
}
