//! Build the deformation triple from a datum, verify its structure equations
//! and test genuineness.

use hypdeform::chart::grid::{Grid2, ScalarField};
use hypdeform::defdata::{build_pair, example_family, warped_support};
use hypdeform::gaussmap::{build_geometry, clifford_torus};
use hypdeform::triple::{composition_frame, genuineness, triple_from_pair, verify_triple, TripleField};

fn main() -> hypdeform::Result<()> {
    let grid = Grid2::square(0.0, 1.0, 64)?;
    let geom = build_geometry(&clifford_torus(grid)?)?;
    let (u, v) = example_family(&geom, 4.0, 2.0)?;
    let t = triple_from_pair(&geom, &build_pair(&geom, &u, &v)?)?;
    let s = warped_support(&geom, &vec![1.0; grid.nv])?;

    let checks = verify_triple(&geom, &t, &s, Some(100.0 * grid.h2()))?;
    println!("structure equations pass: {}", checks.pass());
    println!("{}", checks.to_json().to_pretty());
    let g = genuineness(&t, 1e-8);
    println!("example family genuine: {} (margin {:.3})", g.genuine, g.margin.value);

    let locus = TripleField::from_tau(&geom, &ScalarField::filled(grid, 0.5), &ScalarField::filled(grid, 1.5))?;
    let frame = composition_frame(&locus).expect("hyperbolic triple");
    println!(
        "tau = (0.5, 1.5) genuine: {}, unit residual {:.1e}",
        genuineness(&locus, 1e-8).genuine,
        frame.unit_residual.value
    );
    Ok(())
}
