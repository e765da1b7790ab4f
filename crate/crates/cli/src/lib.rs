//! Experiment driver: reads a TOML run config, runs one subcommand and
//! appends JSON records (one per line) to `<out>/records.jsonl`, with CSV
//! tables and optional YMK1 snapshots next to it.
//!
//! Exit codes: 0 success, 1 failed check or other runtime error, 2 config
//! error, 3 near-reducible connection, 4 no contraction, 5 solver
//! stagnation.

pub mod commands;
pub mod config;
pub mod record;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use record::{read_records, ExperimentRecord, Sink, Status};

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NEAR_REDUCIBLE: i32 = 3;
    pub const NO_CONTRACTION: i32 = 4;
    pub const STAGNATION: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ymk::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("identity check failed: {}", .0.join(", "))]
    CheckFailed(Vec<String>),
    #[error("only {done} of {total} cells completed")]
    Incomplete { done: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(e) => match e {
                ymk::Error::NearReducible { .. } => exit::NEAR_REDUCIBLE,
                ymk::Error::NoContraction { .. } => exit::NO_CONTRACTION,
                ymk::Error::SolverStagnation { .. } => exit::STAGNATION,
                ymk::Error::InvalidArgument(_) => exit::CONFIG,
                _ => exit::FAILURE,
            },
            _ => exit::FAILURE,
        }
    }

    /// Errors that are already reflected in a written record.
    fn recorded(&self) -> bool {
        matches!(self, CliError::CheckFailed(_) | CliError::Incomplete { .. })
    }
}

#[derive(Debug, Parser)]
#[command(name = "ymk", version, about = "Yang-Mills experiments on a lattice Kähler 4-torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run config; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write YMK1 snapshots of produced fields.
    #[arg(long, global = true)]
    pub snapshots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Identity suite at n and n/2 plus the (n, 2n) Weitzenböck refinement pair.
    Check,
    /// lambda(A) and mu(A) of a random connection.
    Spectrum,
    /// Deform a random connection to one with Lambda F = 0.
    Deform,
    /// Yang-Mills gradient flow with harmonicity and rank-one diagnostics.
    Flow,
    /// Norms of the logarithmic cutoff for each configured ratio N.
    Cutoff,
    /// lambda and mu along A_0 + t a over the configured ladder.
    Continuity,
    /// Seeds x amplitudes pipeline: flow, diagnostics, lambda, mu, deform.
    ///
    /// Writes gap.csv with columns seed, amplitude, status, error,
    /// flow_steps, ym_residual, fplus_norm, trace_before, trace_after,
    /// delbar_star_f02, commutator_l2, lambda, reducible, mu. Empty cells
    /// mark stages that were skipped. Cells run on a pool of YMK_THREADS
    /// workers.
    Gap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Spectrum => "spectrum",
            Command::Deform => "deform",
            Command::Flow => "flow",
            Command::Cutoff => "cutoff",
            Command::Continuity => "continuity",
            Command::Gap => "gap",
        }
    }
}

/// Config from the file (or defaults) with command-line overrides applied.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.snapshots |= cli.snapshots;
    cfg.validate()?;
    Ok(cfg)
}

/// Run `command` and write its records; failures are recorded before they
/// are returned.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::open(&cfg.out_dir)?;
    let result = match command {
        Command::Check => commands::cmd_check(cfg, &sink),
        Command::Spectrum => commands::cmd_spectrum(cfg, &sink),
        Command::Deform => commands::cmd_deform(cfg, &sink),
        Command::Flow => commands::cmd_flow(cfg, &sink),
        Command::Cutoff => commands::cmd_cutoff(cfg, &sink),
        Command::Continuity => commands::cmd_continuity(cfg, &sink),
        Command::Gap => commands::cmd_gap(cfg, &sink),
    };
    if let Err(e) = &result {
        if !e.recorded() {
            let rec = ExperimentRecord::new(command.name(), "", cfg, Status::Error, serde_json::Value::Null)
                .with_error(e.to_string());
            sink.append(&rec)?;
        }
    }
    result
}

/// Parse, run and map the outcome to an exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = resolve_config(cli).and_then(|cfg| execute(cli.command, &cfg));
    match outcome {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("ymk {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
