//! Solve the characteristic initial value problem for a support function and
//! check it against the warped closed form.

use hypdeform::chart::grid::Grid2;
use hypdeform::defdata::{support_check, support_solve, warped_support};
use hypdeform::gaussmap::{build_geometry, rotational_isothermic, RadiusProfile};

fn main() -> hypdeform::Result<()> {
    for n in [32, 64, 128] {
        let grid = Grid2::square(0.0, 1.0, n)?;
        let geom = build_geometry(&rotational_isothermic(&RadiusProfile::default(), grid)?)?;
        let nu: Vec<f64> = (0..n).map(|j| 1.0 + 0.2 * grid.v(j).sin()).collect();
        let exact = warped_support(&geom, &nu)?;
        let a: Vec<f64> = (0..n).map(|i| *exact.gamma.at(i, 0)).collect();
        let b: Vec<f64> = (0..n).map(|j| *exact.gamma.at(0, j)).collect();
        let solved = support_solve(&geom, &a, &b)?;
        let err = solved.gamma.sub(&exact.gamma).max_abs(0).value;
        let check = support_check(&geom, &solved, 1e-6);
        println!("n = {n:>3}: max error {err:.2e}, Q(gamma) residual {:.2e}", check.max_residual);
    }
    Ok(())
}
