//! CSV and OBJ output of sampled immersions.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::sample::ImmersionSample;
use crate::error::{Error, Result};

/// `u,v,t,x1..xm` in storage order.
pub fn write_sample_csv(s: &ImmersionSample, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_sample_csv_to(s, file).map_err(|e| Error::io(path, e))
}

pub fn write_sample_csv_to(s: &ImmersionSample, w: impl Write) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["u".to_string(), "v".to_string(), "t".to_string()];
    header.extend((1..=s.dim).map(|c| format!("x{c}")));
    out.write_record(&header)?;
    let g = s.grid;
    for i in 0..g.base.nu {
        for j in 0..g.base.nv {
            for k in 0..g.nt {
                let mut row = vec![g.base.u(i).to_string(), g.base.v(j).to_string(), g.t(k).to_string()];
                row.extend(s.pos[g.idx(i, j, k)].iter().map(|x| x.to_string()));
                out.write_record(&row)?;
            }
        }
    }
    out.flush()
}

/// Rows spanning the three leading principal directions of the points, each
/// with its largest entry positive.
pub fn projection_rows(points: &[DVector<f64>]) -> DMatrix<f64> {
    let m = points[0].len();
    let n = points.len() as f64;
    let mean = points.iter().fold(DVector::zeros(m), |a, p| a + p) / n;
    let mut cov = DMatrix::zeros(m, m);
    for p in points {
        let d = p - &mean;
        cov += &d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut rows = DMatrix::zeros(3, m);
    for (r, &c) in order.iter().take(3).enumerate() {
        let mut v = eig.eigenvectors.column(c).into_owned();
        let big = v.iter().copied().fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if big < 0.0 {
            v = -v;
        }
        rows.set_row(r, &v.transpose());
    }
    rows
}

/// Mesh of the slice `t = t(k)`: one vertex per node and two triangles per
/// cell. Targets above three dimensions are projected by the rows written
/// in the header.
pub fn write_obj_slice(s: &ImmersionSample, k: usize, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_obj_slice_to(s, k, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn write_obj_slice_to(s: &ImmersionSample, k: usize, mut w: impl Write) -> std::io::Result<()> {
    let g = s.grid;
    let (nu, nv) = (g.base.nu, g.base.nv);
    let pts: Vec<DVector<f64>> = (0..nu)
        .flat_map(|i| (0..nv).map(move |j| (i, j)))
        .map(|(i, j)| s.pos[g.idx(i, j, k)].clone())
        .collect();
    writeln!(w, "# slice t = {}", g.t(k))?;
    let proj = if s.dim > 3 {
        let p = projection_rows(&pts);
        for r in 0..3 {
            let row: Vec<String> = p.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(w, "# projection row {r}: {}", row.join(" "))?;
        }
        Some(p)
    } else {
        None
    };
    for p in &pts {
        let q = match &proj {
            Some(m) => m * p,
            None => DVector::from_fn(3, |c, _| if c < p.len() { p[c] } else { 0.0 }),
        };
        writeln!(w, "v {} {} {}", q[0], q[1], q[2])?;
    }
    let v = |i: usize, j: usize| i * nv + j + 1;
    for i in 0..nu - 1 {
        for j in 0..nv - 1 {
            writeln!(w, "f {} {} {}", v(i, j), v(i + 1, j), v(i + 1, j + 1))?;
            writeln!(w, "f {} {} {}", v(i, j), v(i + 1, j + 1), v(i, j + 1))?;
        }
    }
    Ok(())
}
