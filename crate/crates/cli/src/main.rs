use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use timescale_cli::{run, CliError, Overrides, PipelineConfig, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Aggregate, screen, average and impute raw station data.
    Preprocess,
    /// SSA decomposition, clustering and grouped components.
    Ssa,
    /// Fourier band decomposition.
    Fft,
    /// Fit one Poisson GAM.
    Fit,
    /// Fit several models and rank them by UBRE.
    Compare,
    /// Run a synthetic scenario end to end and score recovery.
    Simulate,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Preprocess => Subcommand::Preprocess,
            Command::Ssa => Subcommand::Ssa,
            Command::Fft => Subcommand::Fft,
            Command::Fit => Subcommand::Fit,
            Command::Compare => Subcommand::Compare,
            Command::Simulate => Subcommand::Simulate,
        }
    }
}

/// Timescale decomposition of exposure series and Poisson regression of
/// event counts on the resulting components.
///
/// Log verbosity is read from TIMESCALE_LOG (error, warn, info, debug).
#[derive(Debug, Parser)]
#[command(name = "timescale", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON pipeline config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    window_length: Option<usize>,
    /// Number of clusters cut from the dendrogram.
    #[arg(long)]
    groups: Option<usize>,
    /// Comma-separated period breaks in days.
    #[arg(long, value_delimiter = ',')]
    breaks: Option<Vec<f64>>,
    /// Switches merging to the Pearson rule with this tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: Args) -> Result<usize, CliError> {
    let mut cfg = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.apply(&Overrides {
        window_length: args.window_length,
        groups: args.groups,
        breaks: args.breaks,
        epsilon: args.epsilon,
        seed: args.seed,
        output: args.out,
    });
    Ok(run(args.command.into(), &cfg)?.len())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TIMESCALE_LOG", "warn")).init();
    match execute(Args::parse()) {
        Ok(n) => {
            log::info!("wrote {n} artifacts");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = serde_json::to_string(&e.record()).unwrap_or_else(|_| e.to_string());
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
