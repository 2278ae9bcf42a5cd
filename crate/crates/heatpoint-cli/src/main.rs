use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use heatpoint_cli::config::ExperimentConfig;
use heatpoint_cli::{run, Command, Overrides};

/// Observability and control experiments for the heat equation on (0, 1).
#[derive(Parser)]
#[command(name = "heatpoint", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Precision ladder, e.g. 128,256,512.
    #[arg(long, value_delimiter = ',')]
    bits: Option<Vec<u32>>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    Overrides { out: cli.out, seed: cli.seed, bits: cli.bits, jobs: cli.jobs }.apply(&mut cfg);
    match run(cli.command, &cfg) {
        Ok(summary) => {
            for t in &summary.tasks {
                eprintln!("{}: {:?} ({} failures)", t.task, t.status, t.failures.len());
            }
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
