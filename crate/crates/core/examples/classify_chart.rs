//! Classify the conjugacy structure of the catalog charts.

use hypdeform::chart::grid::Grid2;
use hypdeform::gaussmap::{build_geometry, catalog, classify, RadiusProfile, SurfaceSpec};

fn main() -> hypdeform::Result<()> {
    let grid = Grid2::square(0.0, 1.0, 48)?;
    for spec in [SurfaceSpec::CliffordTorus, SurfaceSpec::RotationalIsothermic(RadiusProfile::default())] {
        let geom = build_geometry(&catalog(&spec, grid)?)?;
        let c = classify(&geom)?;
        let mut ranks = std::collections::BTreeMap::new();
        for r in &c.normal_rank.data {
            *ranks.entry(*r).or_insert(0usize) += 1;
        }
        println!(
            "{spec:?}: {:?}, conjugacy residual {:.2e}, nodes per normal rank {ranks:?}",
            c.kind, c.residual
        );
    }
    Ok(())
}
