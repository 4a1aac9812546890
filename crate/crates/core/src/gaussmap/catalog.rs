//! Example Gauss-image surfaces with closed-form derivatives.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::patch::{Jet, SurfacePatch};
use crate::chart::grid::Grid2;
use crate::error::{Error, Result};

/// Catalog entry and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum SurfaceSpec {
    #[default]
    CliffordTorus,
    RotationalIsothermic(RadiusProfile),
    Sampled { path: PathBuf },
}


impl SurfaceSpec {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "clifford_torus" => Ok(SurfaceSpec::CliffordTorus),
            "rotational_isothermic" => Ok(SurfaceSpec::RotationalIsothermic(RadiusProfile::default())),
            other => Err(Error::UnknownSurface(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SurfaceSpec::CliffordTorus => "clifford_torus",
            SurfaceSpec::RotationalIsothermic(_) => "rotational_isothermic",
            SurfaceSpec::Sampled { .. } => "sampled",
        }
    }
}

/// Radius `r(u) = r0 (1 + amplitude sin(frequency u + phase))` of the
/// rotation circles of a warped-product surface in `S^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusProfile {
    pub r0: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Default for RadiusProfile {
    fn default() -> Self {
        RadiusProfile {
            r0: 0.6,
            amplitude: 0.15,
            frequency: 1.0,
            phase: 0.0,
        }
    }
}

impl RadiusProfile {
    pub fn constant(r0: f64) -> Self {
        RadiusProfile {
            r0,
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
        }
    }

    /// `(r, r', r'')` at `u`.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        let s = self.frequency * u + self.phase;
        let a = self.r0 * self.amplitude;
        let w = self.frequency;
        (
            self.r0 + a * s.sin(),
            a * w * s.cos(),
            -a * w * w * s.sin(),
        )
    }

    /// `S = r^2 (1 - r^2) - r'^2`, positive exactly where the profile admits
    /// isothermic coordinates.
    fn speed_slack(&self, u: f64) -> f64 {
        let (r, dr, _) = self.eval(u);
        r * r * (1.0 - r * r) - dr * dr
    }

    /// Rotation angle rate `omega' = sqrt(S) / (1 - r^2)`.
    fn omega_rate(&self, u: f64) -> f64 {
        let (r, _, _) = self.eval(u);
        self.speed_slack(u).sqrt() / (1.0 - r * r)
    }

    fn check(&self, u0: f64, u1: f64) -> Result<()> {
        let samples = 2048;
        for k in 0..=samples {
            let u = u0 + (u1 - u0) * k as f64 / samples as f64;
            let (r, _, _) = self.eval(u);
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::BadProfile(format!("radius {r} at u = {u} is outside (0, 1)")));
            }
            let s = self.speed_slack(u);
            if !(s > 0.0) {
                return Err(Error::BadProfile(format!(
                    "arclength is not monotone at u = {u} (r^2 (1 - r^2) - r'^2 = {s})"
                )));
            }
        }
        Ok(())
    }
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];
const GL_PANEL: f64 = 0.05;

/// Composite five-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let panels = ((b - a).abs() / GL_PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}

pub fn catalog(spec: &SurfaceSpec, grid: Grid2) -> Result<SurfacePatch> {
    match spec {
        SurfaceSpec::CliffordTorus => clifford_torus(grid),
        SurfaceSpec::RotationalIsothermic(p) => rotational_isothermic(p, grid),
        SurfaceSpec::Sampled { path } => SurfacePatch::from_csv(path),
    }
}

/// `h = (cos u, sin u, cos v, sin v) / sqrt 2`.
pub fn clifford_torus(grid: Grid2) -> Result<SurfacePatch> {
    let k = FRAC_1_SQRT_2;
    SurfacePatch::analytic("clifford_torus", grid, 4, |u, v| {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Jet {
            pos: vec![k * cu, k * su, k * cv, k * sv],
            du: vec![-k * su, k * cu, 0.0, 0.0],
            dv: vec![0.0, 0.0, -k * sv, k * cv],
            duu: vec![-k * cu, -k * su, 0.0, 0.0],
            duv: vec![0.0; 4],
            dvv: vec![0.0, 0.0, -k * cv, -k * sv],
        }
    })
}

/// `h = (rho cos w(u), rho sin w(u), r(u) cos v, r(u) sin v)` with
/// `rho = sqrt(1 - r^2)` and `w` chosen so that `|h_u| = |h_v| = r`.
pub fn rotational_isothermic(profile: &RadiusProfile, grid: Grid2) -> Result<SurfacePatch> {
    profile.check(grid.u0, grid.u1)?;
    let p = *profile;
    SurfacePatch::analytic("rotational_isothermic", grid, 4, |u, v| {
        let (r, dr, ddr) = p.eval(u);
        let rho2 = 1.0 - r * r;
        let rho = rho2.sqrt();
        let drho = -r * dr / rho;
        let ddrho = -(dr * dr + r * ddr) / rho - r * r * dr * dr / (rho * rho2);
        let s = p.speed_slack(u);
        let ds = 2.0 * r * dr * (1.0 - 2.0 * r * r) - 2.0 * dr * ddr;
        let w = gauss_legendre(|x| p.omega_rate(x), 0.0, u);
        let dw = s.sqrt() / rho2;
        let ddw = ds / (2.0 * s.sqrt() * rho2) + s.sqrt() * 2.0 * r * dr / (rho2 * rho2);
        let (sw, cw) = w.sin_cos();
        let (sv, cv) = v.sin_cos();
        Jet {
            pos: vec![rho * cw, rho * sw, r * cv, r * sv],
            du: vec![
                drho * cw - rho * dw * sw,
                drho * sw + rho * dw * cw,
                dr * cv,
                dr * sv,
            ],
            dv: vec![0.0, 0.0, -r * sv, r * cv],
            duu: vec![
                ddrho * cw - 2.0 * drho * dw * sw - rho * ddw * sw - rho * dw * dw * cw,
                ddrho * sw + 2.0 * drho * dw * cw + rho * ddw * cw - rho * dw * dw * sw,
                ddr * cv,
                ddr * sv,
            ],
            duv: vec![0.0, 0.0, -dr * sv, dr * cv],
            dvv: vec![0.0, 0.0, -r * cv, -r * sv],
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::grid::{dot, norm};

    #[test]
    fn gauss_legendre_integrates_polynomials_and_sine() {
        let x9 = gauss_legendre(|x| x.powi(9), 0.0, 1.0);
        assert!((x9 - 0.1).abs() < 1e-15);
        let s = gauss_legendre(f64::sin, 0.0, 2.0);
        assert!((s - (1.0 - 2.0_f64.cos())).abs() < 1e-14);
        assert!((gauss_legendre(f64::cos, 0.0, -1.0) + 1.0_f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn rotational_patch_is_isothermic() {
        let g = Grid2::new(-0.5, 1.0, 12, 0.0, 1.0, 10).unwrap();
        let p = rotational_isothermic(&RadiusProfile::default(), g).unwrap();
        for i in 0..g.nu {
            for j in 0..g.nv {
                let (r, _, _) = RadiusProfile::default().eval(g.u(i));
                let e = dot(p.du.at(i, j), p.du.at(i, j));
                let gg = dot(p.dv.at(i, j), p.dv.at(i, j));
                assert!((e - r * r).abs() < 1e-13 && (gg - r * r).abs() < 1e-13);
                assert!(dot(p.du.at(i, j), p.dv.at(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rotational_second_derivatives_match_differences() {
        let prof = RadiusProfile::default();
        let h = 1e-5;
        let g = Grid2::new(0.3, 0.3 + 7.0 * h, 8, 0.2, 0.3, 8).unwrap();
        let p = rotational_isothermic(&prof, g).unwrap();
        for a in 0..4 {
            let fd = (p.du.at(2, 0)[a] - p.du.at(0, 0)[a]) / (2.0 * h);
            assert!((fd - p.duu.at(1, 0)[a]).abs() < 1e-8, "component {a}");
            let fd = (p.pos.at(2, 0)[a] - p.pos.at(0, 0)[a]) / (2.0 * h);
            assert!((fd - p.du.at(1, 0)[a]).abs() < 1e-8, "component {a}");
        }
    }

    #[test]
    fn constant_profile_is_the_clifford_torus() {
        let g = Grid2::square(-1.0, 1.0, 9).unwrap();
        let a = rotational_isothermic(&RadiusProfile::constant(FRAC_1_SQRT_2), g).unwrap();
        let b = clifford_torus(g).unwrap();
        for (x, y) in a.pos.data.iter().zip(&b.pos.data) {
            assert!((x - y).abs() < 1e-14);
        }
        for (x, y) in a.duu.data.iter().zip(&b.duu.data) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn steep_profile_is_rejected() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let steep = RadiusProfile {
            r0: 0.5,
            amplitude: 0.9,
            frequency: 4.0,
            phase: 0.0,
        };
        assert!(matches!(rotational_isothermic(&steep, g), Err(Error::BadProfile(_))));
    }

    #[test]
    fn clifford_is_unit_and_names_resolve() {
        let g = Grid2::square(0.0, 1.0, 8).unwrap();
        let p = clifford_torus(g).unwrap();
        assert!(p.pos.data.chunks(4).all(|h| (norm(h) - 1.0).abs() < 1e-15));
        assert!(SurfaceSpec::by_name("klein_bottle").is_err());
        assert_eq!(SurfaceSpec::by_name("rotational_isothermic").unwrap().name(), "rotational_isothermic");
    }
}
