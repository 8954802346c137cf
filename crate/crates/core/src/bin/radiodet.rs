use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use radiodet::pipeline::{self, RunConfig};

#[derive(Parser)]
#[command(name = "radiodet", version, about = "Radio-assisted human detection pipeline")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set noise.sigma=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write noisy radio regions simulated from the ground truth.
    SimulateRegions {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate (AoA, AoA, ToF) per person from paired CSI frames.
    Localize {
        #[arg(required = true)]
        csi: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project radio estimates into image regions.
    Project {
        estimates: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured method and write metrics and detections.
    Run,
    /// Re-run once per value of one parameter and write a CSV table.
    Sweep {
        /// Dotted config key, e.g. `noise.k`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Write a synthetic dataset (annotations, detections, optional CSI).
    Synth {
        #[arg(long)]
        csi: bool,
    },
}

fn load(common: &Common) -> radiodet::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> radiodet::Result<()> {
    let cfg = load(&cli.common)?;
    match cli.command {
        Command::SimulateRegions { out } => {
            println!("{}", pipeline::cmd_simulate_regions(&cfg, out.as_deref())?.display());
        }
        Command::Localize { csi, out } => {
            println!("{}", pipeline::cmd_localize(&cfg, &csi, out.as_deref())?.display());
        }
        Command::Project { estimates, out } => {
            println!("{}", pipeline::cmd_project(&cfg, &estimates, out.as_deref())?.display());
        }
        Command::Run => {
            let art = pipeline::cmd_run(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&art.report)?);
        }
        Command::Sweep { param, values } => {
            println!("{}", pipeline::cmd_sweep(&cfg, &param, &values)?.display());
        }
        Command::Synth { csi } => {
            let art = pipeline::cmd_synth(&cfg, csi)?;
            println!("{}", art.annotations.display());
            println!("{}", art.detections.display());
            if csi {
                println!("{} CSI frames", art.csi.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
