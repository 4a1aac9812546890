use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hypdeform::pipeline::{exit_code, run, PipelineConfig, Subcommand, Tolerances};
use hypdeform::Error;
use log::LevelFilter;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Classify,
    Membership,
    Build,
    Reconstruct,
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Classify => Subcommand::Classify,
            Command::Membership => Subcommand::Membership,
            Command::Build => Subcommand::Build,
            Command::Reconstruct => Subcommand::Reconstruct,
            Command::All => Subcommand::All,
        }
    }
}

/// Builds and certifies rank-two hypersurfaces and their isometric deformations.
#[derive(Debug, Parser)]
#[command(name = "gdeform", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON pipeline config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance applied to every grid-scaled check.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid override `<nu>x<nv>[x<nt>]`.
    #[arg(long)]
    grid: Option<String>,
}

fn log_level() -> Result<LevelFilter, Error> {
    match std::env::var("GD_LOG").as_deref() {
        Err(_) | Ok("info") => Ok(LevelFilter::Info),
        Ok("quiet") => Ok(LevelFilter::Error),
        Ok("debug") => Ok(LevelFilter::Debug),
        Ok(other) => Err(Error::Config(format!("GD_LOG = '{other}', expected quiet, info or debug"))),
    }
}

fn config(cli: &Cli) -> Result<PipelineConfig, Error> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("{}: {e}", cli.config.display())))?;
    let mut cfg = PipelineConfig::from_json(&text)?;
    if let Some(g) = &cli.grid {
        cfg.set_grid(g)?;
    }
    if let Some(t) = cli.tol {
        cfg.tolerances = Tolerances::uniform(t);
    }
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = log_level().and_then(|level| {
        env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
        let cfg = config(&cli)?;
        run(cli.command.into(), &cfg, &cfg.output)
    });
    match &result {
        Ok(o) => print!("{}", o.summary),
        Err(e) => eprintln!("gdeform: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
