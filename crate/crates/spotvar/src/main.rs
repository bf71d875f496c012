use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spotvar::{run_command, AppError, AppResult, Command, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "spotvar",
    version,
    about = "Fourier spot variance and variance-swap link regressions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the configured model and write ticks.csv and vix.csv.
    Simulate(Common),
    /// Jump-test and estimate the daily spot variance.
    Estimate(Common),
    /// Run the intraday jump test on every session.
    JumpScan(Common),
    /// Realized variance against sampling interval.
    Signature(Common),
    /// Fit the link regressions, on a saved panel or from the configured source.
    Regress {
        #[command(flatten)]
        common: Common,
        /// Panel CSV written by an earlier run.
        #[arg(long)]
        panel: Option<PathBuf>,
    },
    /// Every stage, from ingestion to reports.
    Run(Common),
    /// Variance-swap rate from an option chain.
    ReplicateVix(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory, overriding the config and the environment.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of simulated days.
    #[arg(long)]
    days: Option<usize>,
}

impl Common {
    fn config(&self) -> AppResult<PipelineConfig> {
        let mut config = PipelineConfig::load(&self.config)?;
        if let Some(dir) = &self.output_dir {
            config.output.dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            config.simulation.seed = seed;
        }
        if let Some(days) = self.days {
            config.simulation.days = days;
        }
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> AppResult<()> {
    let (command, common, panel) = match &cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c, None),
        Cmd::Estimate(c) => (Command::Estimate, c, None),
        Cmd::JumpScan(c) => (Command::JumpScan, c, None),
        Cmd::Signature(c) => (Command::Signature, c, None),
        Cmd::Regress { common, panel } => (Command::Regress, common, panel.as_deref()),
        Cmd::Run(c) => (Command::Run, c, None),
        Cmd::ReplicateVix(c) => (Command::ReplicateVix, c, None),
    };
    let config = common.config()?;
    let manifest = run_command(command, &config, panel)?;
    for stage in &manifest.stages {
        eprintln!("{:<10} {:>8.3}s", stage.stage, stage.seconds);
    }
    for a in &manifest.artifacts {
        println!("{}", config.output.dir.join(&a.path).display());
    }
    println!("{}", config.output.dir.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &AppError) -> u8 {
    e.exit_code() as u8
}
