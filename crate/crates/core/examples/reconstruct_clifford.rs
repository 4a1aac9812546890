//! Reconstruct the hypersurface over the Clifford torus and its deformation in
//! codimension two, then compare their metrics.

use hypdeform::chart::grid::{Grid2, Grid3};
use hypdeform::defdata::{build_pair, example_family, warped_support};
use hypdeform::gaussmap::{build_geometry, clifford_torus};
use hypdeform::reconstruct::{frame_integrate_g, gauss_param_f, metric_deviation, second_form_g, PathOrder};
use hypdeform::triple::triple_from_pair;

fn main() -> hypdeform::Result<()> {
    for n in [32, 64, 128] {
        let grid = Grid2::square(0.0, 1.0, n)?;
        let geom = build_geometry(&clifford_torus(grid)?)?;
        let (u, v) = example_family(&geom, 4.0, 2.0)?;
        let t = triple_from_pair(&geom, &build_pair(&geom, &u, &v)?)?;
        let s = warped_support(&geom, &vec![1.0; n])?;

        let f = gauss_param_f(&geom, &s, Grid3::new(grid, -0.1, 0.1, 5)?)?;
        let form = second_form_g(&t, &f, 1e-6)?;
        let g = frame_integrate_g(&f, &form, PathOrder::UFirst, None)?;
        let dev = metric_deviation(&f.sample, &g.sample)?;
        println!(
            "n = {n:>3}: metric deviation {:.2e}, holonomy {:.2e}",
            dev.value, g.holonomy.value
        );
    }
    Ok(())
}
