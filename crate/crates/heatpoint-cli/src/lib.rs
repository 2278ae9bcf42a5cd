//! Experiment harness: configuration, task orchestration and output files.

pub mod config;
pub mod output;
pub mod tasks;

use std::path::PathBuf;

use heatpoint_core::Error;

use config::{ConfigError, ExperimentConfig};
use output::{OutputDir, Status, TaskStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    ObsSweep,
    Control,
    Lemmas,
    All,
}

/// Flag values that replace the matching top-level config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub bits: Option<Vec<u32>>,
    pub jobs: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.bits {
            cfg.bits = v.clone();
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v;
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "output failed: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 4,
        }
    }
}

pub struct RunSummary {
    pub tasks: Vec<TaskStatus>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.tasks.iter().all(|t| t.status == Status::Ok) {
            0
        } else {
            3
        }
    }
}

/// Run the selected tasks into `cfg.out` and write the manifest last.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    cfg.validate().map_err(RunError::Config)?;
    let anchor = cfg.anchor.resolve();
    if let Err(Error::InvalidInput(msg)) = &anchor {
        return Err(RunError::Config(ConfigError(format!("anchor: {msg}"))));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().map_err(std::io::Error::other)?;
    let out = OutputDir::create(&cfg.out)?;
    out.json("config.json", cfg)?;
    let ctx = tasks::Context { cfg, anchor, pool: &pool, out: &out };
    let selected: &[fn(&tasks::Context) -> std::io::Result<TaskStatus>] = match command {
        Command::Classify => &[tasks::classify],
        Command::ObsSweep => &[tasks::obs_sweep],
        Command::Control => &[tasks::control],
        Command::Lemmas => &[tasks::lemmas],
        Command::All => &[tasks::classify, tasks::obs_sweep, tasks::control, tasks::lemmas],
    };
    let mut statuses = Vec::new();
    for task in selected {
        statuses.push(task(&ctx)?);
    }
    output::write_manifest(&out, cfg, &statuses)?;
    Ok(RunSummary { tasks: statuses })
}
