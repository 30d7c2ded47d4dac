//! Command-line driver. Thread count comes from `OLDROYD_THREADS`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oldroyd::io::config::{parse_sweep, MeshSpec};
use oldroyd::io::{cmd_certify, cmd_mms, cmd_probe, cmd_solve, RunConfig};
use oldroyd::{Error, Result};

#[derive(Parser)]
#[command(name = "oldroyd", version, about = "Diffusive Oldroyd solver and well-posedness certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (dotted `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Unit-square mesh with N x N cells; overrides `mesh.*`.
    #[arg(long, global = true)]
    mesh_n: Option<usize>,
    /// Refinement levels for `mms`.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Parameter sweep for `certify`, e.g. `we=0.01:0.2:20`.
    #[arg(long, global = true)]
    sweep: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve and certify the energy bound.
    Solve,
    /// Evaluate constants and verdicts without solving.
    Certify,
    /// Manufactured-solution convergence study.
    Mms,
    /// Multi-start uniqueness probe.
    Probe,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.mesh_n {
        cfg.mesh = MeshSpec::UnitSquare(n);
    }
    if let Some(levels) = cli.levels {
        cfg.mms_levels = levels;
    }
    if let Some(s) = &cli.sweep {
        cfg.sweep = Some(parse_sweep(s)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_threads() -> Result<()> {
    let Ok(v) = std::env::var("OLDROYD_THREADS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| Error::Config(format!("OLDROYD_THREADS must be an integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot set thread count: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = set_threads().and_then(|_| load(&cli)).and_then(|cfg| match cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Certify => cmd_certify(&cfg),
        Command::Mms => cmd_mms(&cfg),
        Command::Probe => cmd_probe(&cfg),
    });
    match outcome {
        Ok(out) => {
            println!("{}", out.summary);
            println!("artifacts: {}", out.run_dir.display());
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
