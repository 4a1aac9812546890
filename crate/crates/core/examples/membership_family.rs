//! Membership of the explicit example family in the deformation class, and a
//! perturbation that leaves it.

use hypdeform::chart::grid::Grid2;
use hypdeform::defdata::{build_pair, ch_membership, example_family, DeformationDatum};
use hypdeform::gaussmap::{build_geometry, rotational_isothermic, RadiusProfile};

fn main() -> hypdeform::Result<()> {
    let grid = Grid2::square(0.0, 1.0, 128)?;
    let geom = build_geometry(&rotational_isothermic(&RadiusProfile::default(), grid)?)?;
    let (u, v) = example_family(&geom, 4.0, 2.0)?;
    let tol = 50.0 * grid.h2();

    let family = ch_membership(&DeformationDatum::Hyperbolic(build_pair(&geom, &u, &v)?), Some(tol));
    println!("family:    residual {:.2e}, pass {}", family.max_residual, family.pass);

    let bu: Vec<f64> = u.iter().enumerate().map(|(i, x)| x * (10.0 * grid.u(i)).sin().exp()).collect();
    let bv: Vec<f64> = v.iter().enumerate().map(|(j, x)| x * (10.0 * grid.v(j)).sin().exp()).collect();
    let other = ch_membership(&DeformationDatum::Hyperbolic(build_pair(&geom, &bu, &bv)?), Some(tol));
    println!("perturbed: residual {:.2e} at {:?}, pass {}", other.max_residual, other.node, other.pass);
    Ok(())
}
