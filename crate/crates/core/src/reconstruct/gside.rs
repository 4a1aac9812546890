//! The deformation `g` from a triple: second fundamental form, normal
//! connection and integration of the moving frame.

use nalgebra::{DVector, Matrix2, Matrix3, SMatrix, Vector3};

use super::fside::FSample;
use super::sample::{diff3, max3, node3, ImmersionSample, MaxAt3};
use crate::chart::grid::{Grid3, Matrix2Field, ScalarField};
use crate::error::{Error, Result};
use crate::triple::TripleField;

pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Second fundamental form of `g` in the normal frame `(xi_1, xi_2)` and
/// the normal connection one-form, on the ruling grid.
#[derive(Debug, Clone)]
pub struct GSecondForm {
    pub grid: Grid3,
    /// Symmetrised `-<D_i X, P Y>'` with the ruling in the kernel.
    pub ii: Vec<[Matrix3<f64>; 2]>,
    /// `(phi_u, phi_v, 0)`.
    pub phi: Vec<Vector3<f64>>,
    /// Max asymmetry of `D_i^t g P` before symmetrisation.
    pub symmetry: MaxAt3,
    /// Max `|det II_1 + det II_2 - det II_f|` on the horizontal block,
    /// relative to `max(1, |gP|^2)`.
    pub gauss: MaxAt3,
}

/// `alpha_g(X, Y) = sum_i <A D_i X, Y> xi_i` for the triple; fails when the
/// pairing is not symmetric to `tol`.
pub fn second_form_g(t: &TripleField, f: &FSample, tol: f64) -> Result<GSecondForm> {
    let form = second_form_from(&t.d1, &t.d2, &t.phi_u, &t.phi_v, f)?;
    if !(form.symmetry.value <= tol) {
        return Err(Error::Compatibility(format!(
            "second form of g not symmetric: {:e} at node {:?}",
            form.symmetry.value, form.symmetry.node
        )));
    }
    Ok(form)
}

/// Same as [`second_form_g`] for arbitrary `D_1, D_2, phi`, without the
/// symmetry gate.
pub fn second_form_from(
    d1: &Matrix2Field,
    d2: &Matrix2Field,
    phi_u: &ScalarField,
    phi_v: &ScalarField,
    f: &FSample,
) -> Result<GSecondForm> {
    let grid = f.grid();
    if [d1.grid, d2.grid, phi_u.grid, phi_v.grid].iter().any(|g| *g != grid.base) {
        return Err(Error::ShapeMismatch("triple and ruling grid differ".into()));
    }
    let n = grid.len();
    let mut ii = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for idx in 0..n {
        let (i, j, _) = node3(&grid, idx);
        let kt = f.gp[idx];
        let pair = |d: &Matrix2<f64>| {
            let m = -(d.transpose() * kt);
            let s = (m + m.transpose()) * 0.5;
            let mut out = Matrix3::zeros();
            out.fixed_view_mut::<2, 2>(0, 0).copy_from(&s);
            out
        };
        ii.push([pair(d1.at(i, j)), pair(d2.at(i, j))]);
        phi.push(Vector3::new(*phi_u.at(i, j), *phi_v.at(i, j), 0.0));
    }
    let symmetry = max3(&grid, 0, |i, j, k| {
        let kt = f.gp[grid.idx(i, j, k)];
        [d1.at(i, j), d2.at(i, j)]
            .iter()
            .map(|d| {
                let m = d.transpose() * kt;
                (m - m.transpose()).abs().max()
            })
            .fold(0.0, f64::max)
    });
    let gauss = max3(&grid, 0, |i, j, k| {
        let idx = grid.idx(i, j, k);
        let kt = f.gp[idx];
        let det2 = |m: &Matrix3<f64>| m.fixed_view::<2, 2>(0, 0).determinant();
        let lhs = det2(&ii[idx][0]) + det2(&ii[idx][1]);
        (lhs - kt.determinant()).abs() / kt.norm_squared().max(1.0)
    });
    Ok(GSecondForm { grid, ii, phi, symmetry, gauss })
}

/// Order of the integration paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    /// Along `u` at the first `v` line, then along every `v` line.
    UFirst,
    /// Along `v` at the first `u` line, then along every `u` line.
    VFirst,
}

/// Integrated `g` with its flatness diagnostics.
#[derive(Debug, Clone)]
pub struct GIntegration {
    pub sample: ImmersionSample,
    /// Max frame defect around a grid cell.
    pub holonomy: MaxAt3,
    /// Same for cells in the `uv`, `ut` and `vt` planes.
    pub holonomy_planes: [MaxAt3; 3],
    /// Max skew defect of the orthonormal connection before projection.
    pub connection_asymmetry: f64,
    pub order: PathOrder,
}

/// `100 (hu^2 + hv^2 + ht^2)`.
pub fn default_frame_tol(g: &Grid3) -> f64 {
    100.0 * (g.base.h2() + g.ht * g.ht)
}

/// Connection matrices of the orthonormalised frame per node and axis.
struct Connection {
    w: Vec<[Matrix5; 3]>,
    l: Vec<Matrix3<f64>>,
    asymmetry: f64,
}

fn connection(f: &FSample, form: &GSecondForm) -> Result<Connection> {
    let grid = f.grid();
    if grid.nt < 3 {
        return Err(Error::GridTooSmall { axis: "t", nodes: grid.nt, needed: 3 });
    }
    let metric = &f.sample.metric;
    let mut l = Vec::with_capacity(metric.len());
    for (idx, m) in metric.iter().enumerate() {
        let (i, j, _) = node3(&grid, idx);
        let c = m
            .cholesky()
            .ok_or(Error::DegenerateMetric { node: (i, j), det: m.determinant() })?;
        l.push(c.l());
    }
    let mut asymmetry = 0.0_f64;
    let mut w = Vec::with_capacity(metric.len());
    for idx in 0..metric.len() {
        let (i, j, k) = node3(&grid, idx);
        let g = metric[idx];
        let ginv = g.try_inverse().expect("positive definite");
        let dg: [Matrix3<f64>; 3] = std::array::from_fn(|a| diff3(metric, &grid, a, i, j, k));
        let lo = l[idx];
        let linv = lo.try_inverse().expect("positive definite");
        let mut out = [Matrix5::zeros(); 3];
        for (a, wa) in out.iter_mut().enumerate() {
            // (gamma_a)[b][c] = Gamma^c_{ab}.
            let first = Matrix3::from_fn(|b, d| 0.5 * (dg[a][(b, d)] + dg[b][(a, d)] - dg[d][(a, b)]));
            let gam = (ginv * first.transpose()).transpose();
            // L^{-1} dL is the lower part of L^{-1} dG L^{-t} with half diagonal.
            let x = linv * dg[a] * linv.transpose();
            let ldl = Matrix3::from_fn(|r, c| match r.cmp(&c) {
                std::cmp::Ordering::Greater => x[(r, c)],
                std::cmp::Ordering::Equal => 0.5 * x[(r, c)],
                std::cmp::Ordering::Less => 0.0,
            });
            let wtt = -ldl + linv * gam * lo;
            wa.fixed_view_mut::<3, 3>(0, 0).copy_from(&wtt);
            for s in 0..2 {
                let sf = &form.ii[idx][s];
                let col = linv * sf.column(a);
                let row = -(ginv * sf.column(a)).transpose() * lo;
                wa.fixed_view_mut::<3, 1>(0, 3 + s).copy_from(&col);
                wa.fixed_view_mut::<1, 3>(3 + s, 0).copy_from(&row);
            }
            let p = form.phi[idx][a];
            wa[(3, 4)] = p;
            wa[(4, 3)] = -p;
            asymmetry = asymmetry.max((*wa + wa.transpose()).abs().max());
            *wa = (*wa - wa.transpose()) * 0.5;
        }
        w.push(out);
    }
    Ok(Connection { w, l, asymmetry })
}

fn neighbour(g: &Grid3, idx: usize, axis: usize) -> Option<usize> {
    let (i, j, k) = node3(g, idx);
    match axis {
        0 if i + 1 < g.base.nu => Some(g.idx(i + 1, j, k)),
        1 if j + 1 < g.base.nv => Some(g.idx(i, j + 1, k)),
        2 if k + 1 < g.nt => Some(g.idx(i, j, k + 1)),
        _ => None,
    }
}

fn step(g: &Grid3, axis: usize) -> f64 {
    [g.base.hu, g.base.hv, g.ht][axis]
}

/// Integrates the frame of `g` from the first node of the zero slice,
/// where it is the frame of `f` followed by `(N, 0)` and `e_5`.
pub fn frame_integrate_g(
    f: &FSample,
    form: &GSecondForm,
    order: PathOrder,
    tol: Option<f64>,
) -> Result<GIntegration> {
    let grid = f.grid();
    let conn = connection(f, form)?;
    let n = grid.len();
    // Forward transports along each axis, identity at the last node.
    let edges: Vec<[Matrix5; 3]> = (0..n)
        .map(|idx| {
            std::array::from_fn(|a| match neighbour(&grid, idx, a) {
                Some(q) => ((conn.w[idx][a] + conn.w[q][a]) * (0.5 * step(&grid, a))).exp(),
                None => Matrix5::identity(),
            })
        })
        .collect();

    let mut planes = [MaxAt3 { value: 0.0, node: (0, 0, 0) }; 3];
    for idx in 0..n {
        for (p, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            let (Some(pa), Some(pb)) = (neighbour(&grid, idx, a), neighbour(&grid, idx, b)) else {
                continue;
            };
            let d = (edges[pa][b] * edges[idx][a] - edges[pb][a] * edges[idx][b]).norm();
            if d > planes[p].value || d.is_nan() {
                planes[p] = MaxAt3 { value: d, node: node3(&grid, idx) };
            }
        }
    }
    let hol = planes
        .iter()
        .copied()
        .fold(planes[0], |m, x| if x.value > m.value || x.value.is_nan() { x } else { m });
    let tol = tol.unwrap_or_else(|| default_frame_tol(&grid));
    if !(hol.value <= 100.0 * tol) {
        return Err(Error::Compatibility(format!(
            "plaquette holonomy {:e} at node {:?} exceeds {:e}",
            hol.value,
            hol.node,
            100.0 * tol
        )));
    }

    let k0 = grid.zero_slice().unwrap_or(0);
    let o = grid.idx(0, 0, k0);
    let fr = &f.sample.frame[o];
    let mut e0 = Matrix5::zeros();
    let linv = conn.l[o].try_inverse().expect("positive definite");
    for b in 0..3 {
        let mut row = DVector::zeros(5);
        for c in 0..3 {
            row.rows_mut(0, 4).axpy(linv[(b, c)], &fr[c], 1.0);
        }
        e0.set_row(b, &row.transpose());
    }
    let nrm = &f.sample.normals[o][0];
    for c in 0..4 {
        e0[(3, c)] = nrm[c];
    }
    e0[(4, 4)] = 1.0;

    let mut frames = vec![Matrix5::zeros(); n];
    let mut pos = vec![DVector::<f64>::zeros(5); n];
    let mut done = vec![false; n];
    frames[o] = e0;
    pos[o].rows_mut(0, 4).copy_from(&f.sample.pos[o]);
    done[o] = true;

    let tangent = |frames: &[Matrix5], idx: usize, a: usize| -> DVector<f64> {
        let lrow = conn.l[idx].row(a);
        let mut v = DVector::zeros(5);
        for c in 0..3 {
            v += frames[idx].row(c).transpose() * lrow[c];
        }
        v
    };
    let mut walk = |from: usize, to: usize, axis: usize, frames: &mut Vec<Matrix5>, pos: &mut Vec<DVector<f64>>| {
        let forward = neighbour(&grid, from, axis) == Some(to);
        let m = if forward {
            edges[from][axis]
        } else {
            edges[to][axis].transpose()
        };
        frames[to] = m * frames[from];
        let h = if forward { step(&grid, axis) } else { -step(&grid, axis) };
        if axis < 2 {
            let t = (tangent(frames, from, axis) + tangent(frames, to, axis)) * (0.5 * h);
            pos[to] = &pos[from] + t;
        }
        done[to] = true;
    };

    let (first, second, nf, ns) = match order {
        PathOrder::UFirst => (0, 1, grid.base.nu, grid.base.nv),
        PathOrder::VFirst => (1, 0, grid.base.nv, grid.base.nu),
    };
    let at = |p: usize, q: usize, k: usize| {
        if first == 0 {
            grid.idx(p, q, k)
        } else {
            grid.idx(q, p, k)
        }
    };
    for p in 1..nf {
        walk(at(p - 1, 0, k0), at(p, 0, k0), first, &mut frames, &mut pos);
    }
    for p in 0..nf {
        for q in 1..ns {
            walk(at(p, q - 1, k0), at(p, q, k0), second, &mut frames, &mut pos);
        }
    }
    // Rulings are straight: positions along t follow the ruling direction
    // of the zero slice, frames are transported.
    for p in 0..nf {
        for q in 0..ns {
            let base = at(p, q, k0);
            let dir = tangent(&frames, base, 2);
            for k in 0..grid.nt {
                pos[at(p, q, k)] = &pos[base] + &dir * (grid.t(k) - grid.t(k0));
            }
            for k in k0 + 1..grid.nt {
                walk(at(p, q, k - 1), at(p, q, k), 2, &mut frames, &mut pos);
            }
            for k in (0..k0).rev() {
                walk(at(p, q, k + 1), at(p, q, k), 2, &mut frames, &mut pos);
            }
        }
    }
    debug_assert!(done.iter().all(|d| *d));

    let mut frame = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut second_forms = Vec::with_capacity(n);
    for idx in 0..n {
        frame.push(std::array::from_fn(|a| tangent(&frames, idx, a)));
        normals.push((3..5).map(|r| DVector::from_iterator(5, frames[idx].row(r).iter().copied())).collect());
        second_forms.push(form.ii[idx].to_vec());
    }
    let sample = ImmersionSample {
        grid,
        dim: 5,
        pos,
        frame,
        normals,
        metric: f.sample.metric.clone(),
        second: second_forms,
    };
    Ok(GIntegration { sample, holonomy: hol, holonomy_planes: planes, connection_asymmetry: conn.asymmetry, order })
}

/// Holonomy defect only, for refinement studies.
pub fn plaquette_holonomy(f: &FSample, form: &GSecondForm) -> Result<MaxAt3> {
    frame_integrate_g(f, form, PathOrder::UFirst, Some(f64::INFINITY)).map(|g| g.holonomy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::Grid2;
    use crate::defdata::{build_pair, warped_support, SupportFunction};
    use crate::gaussmap::{build_geometry, clifford_torus, ChartGeometry};
    use crate::reconstruct::fside::gauss_param_f;
    use crate::reconstruct::sample::{pad, rigid_fit};
    use crate::triple::triple_from_pair;

    fn setup(n: usize, wobble: f64) -> (ChartGeometry, TripleField, SupportFunction) {
        let g = Grid2::square(0.0, 1.0, n).unwrap();
        let geom = build_geometry(&clifford_torus(g).unwrap()).unwrap();
        let d = build_pair(&geom, &vec![0.5; n], &vec![0.5; n]).unwrap();
        let t = triple_from_pair(&geom, &d).unwrap();
        let nu: Vec<f64> = (0..n).map(|j| 1.0 + wobble * g.v(j).sin()).collect();
        let s = warped_support(&geom, &nu).unwrap();
        (geom, t, s)
    }

    fn f_of(geom: &ChartGeometry, s: &SupportFunction, nt: usize) -> FSample {
        gauss_param_f(geom, s, Grid3::new(geom.grid, -0.1, 0.1, nt).unwrap()).unwrap()
    }

    #[test]
    fn clifford_frame_is_flat() {
        let (geom, t, s) = setup(24, 0.0);
        let f = f_of(&geom, &s, 5);
        let form = second_form_g(&t, &f, 1e-10).unwrap();
        let g = frame_integrate_g(&f, &form, PathOrder::UFirst, None).unwrap();
        assert!(g.holonomy.value < 1e-10, "{:?}", g.holonomy);
        assert!(g.connection_asymmetry < 1e-10);
        g.sample.validate().unwrap();
    }

    #[test]
    fn gauss_equation_holds_pointwise() {
        let (geom, t, s) = setup(16, 0.2);
        let f = f_of(&geom, &s, 5);
        let form = second_form_g(&t, &f, default_frame_tol(&f.grid())).unwrap();
        assert!(form.gauss.value < 1e-9, "{:?}", form.gauss);
    }

    #[test]
    fn asymmetric_pairing_is_rejected() {
        let (geom, t, s) = setup(12, 0.0);
        let f = f_of(&geom, &s, 5);
        let mut bad = t.clone();
        bad.d1 = bad.d1.map(|m| m + Matrix2::new(0.0, 0.3, 0.0, 0.0));
        assert!(matches!(second_form_g(&bad, &f, 1e-6), Err(Error::Compatibility(_))));
    }

    fn zero_error(n: usize) -> f64 {
        let (geom, _, s) = setup(n, 0.2);
        let f = f_of(&geom, &s, 5);
        let b = geom.grid;
        let form = second_form_from(
            &Matrix2Field::filled(b, Matrix2::identity()),
            &Matrix2Field::filled(b, Matrix2::zeros()),
            &ScalarField::zeros(b),
            &ScalarField::zeros(b),
            &f,
        )
        .unwrap();
        let g = frame_integrate_g(&f, &form, PathOrder::UFirst, None).unwrap();
        let x: Vec<_> = f.sample.pos.iter().map(|p| pad(p, 5)).collect();
        rigid_fit(&x, &g.sample.pos).unwrap().max_error
    }

    #[test]
    fn zero_deformation_is_rigid() {
        let (a, b) = (zero_error(16), zero_error(32));
        assert!(b < 1e-3 && a / b > 3.0, "{a:e} {b:e}");
    }

    fn transposition(n: usize) -> f64 {
        let (geom, t, s) = setup(n, 0.2);
        let f = f_of(&geom, &s, 5);
        let form = second_form_g(&t, &f, default_frame_tol(&f.grid())).unwrap();
        let a = frame_integrate_g(&f, &form, PathOrder::UFirst, None).unwrap();
        let b = frame_integrate_g(&f, &form, PathOrder::VFirst, None).unwrap();
        a.sample.pos.iter().zip(&b.sample.pos).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn path_order_agrees_at_second_order() {
        let (a, b) = (transposition(16), transposition(32));
        assert!(b < 1e-3 && a / b > 3.0, "{a:e} {b:e}");
    }
}
