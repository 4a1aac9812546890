//! Run every stage from a JSON config and print the verdicts.

use std::path::PathBuf;

use hypdeform::pipeline::{run, PipelineConfig, Subcommand};

fn main() -> hypdeform::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let path = std::env::args().nth(1).map_or_else(|| dir.join("rotational.json"), PathBuf::from);
    let cfg = PipelineConfig::load(&path)?;
    cfg.validate()?;
    let outcome = run(Subcommand::All, &cfg, &cfg.output)?;
    print!("{}", outcome.summary);
    println!("reports in {}", cfg.output.display());
    Ok(())
}
