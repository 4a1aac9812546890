//! Write both immersions as CSV samples and their t = 0 slices as OBJ meshes.

use std::path::PathBuf;

use hypdeform::pipeline::{evaluate, PipelineConfig, Subcommand};
use hypdeform::gaussmap::SurfaceSpec;
use hypdeform::reconstruct::{write_obj_slice, write_sample_csv};

fn main() -> hypdeform::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "gdeform-mesh".into()));
    std::fs::create_dir_all(&out).map_err(|e| hypdeform::Error::io(&out, e))?;
    let cfg = PipelineConfig::for_surface(SurfaceSpec::CliffordTorus, 32);
    let (_, rec) = evaluate(Subcommand::Reconstruct, &cfg)?;
    let rec = rec.expect("reconstruction ran");
    let k = rec.f.grid().zero_slice().expect("t = 0 is a node");
    write_sample_csv(&rec.f.sample, &out.join("f.csv"))?;
    write_sample_csv(&rec.g.sample, &out.join("g.csv"))?;
    write_obj_slice(&rec.f.sample, k, &out.join("f_slice.obj"))?;
    write_obj_slice(&rec.g.sample, k, &out.join("g_slice.obj"))?;
    println!("wrote f.csv, g.csv, f_slice.obj, g_slice.obj to {}", out.display());
    Ok(())
}
