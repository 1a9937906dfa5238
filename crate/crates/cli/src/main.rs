//! `cascade`: train, classify, evaluate, sweep and ablate from the shell.
//!
//! stdout carries results only. Diagnostics go to stderr, filtered by
//! `CASCADE_LOG`. Exit codes: 0 success, 1 operational error, 2 gate failure.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use cascade_core::data::Fixture;
use clap::{Args, Parser, Subcommand};

use config::{Overrides, PrimaryKind, RunConfig};

/// Minimum accuracy gain over primary-alone demanded by `--require-improvement`.
pub const REQUIRED_GAIN: f64 = 0.02;

#[derive(Debug)]
pub enum Failure {
    Operational(String),
    Gate(String),
}

impl Failure {
    pub fn op(msg: impl Into<String>) -> Self {
        Failure::Operational(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Operational(m) => write!(f, "error: {m}"),
            Failure::Gate(m) => write!(f, "gate failed: {m}"),
        }
    }
}

impl From<cascade_core::Error> for Failure {
    fn from(e: cascade_core::Error) -> Self {
        Failure::Operational(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "cascade", version, about = "Confidence-gated text classification with verdict agents")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use a bundled corpus instead of the configured one.
    #[arg(long, global = true)]
    fixture: Option<Fixture>,
    /// Confidence threshold in [0, 1].
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    primary: Option<PrimaryKind>,
    /// Base URL of a classify service, for `--primary remote`.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Output directory for artifacts and JSON reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Load trained artifacts from this directory instead of training.
    #[arg(long, global = true)]
    artifacts: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the baseline and agents and write the artifacts to --out.
    Train,
    /// Classify texts and print one JSON decision per line.
    Classify(ClassifyArgs),
    /// Evaluate the cascade on the held-out documents.
    Evaluate(GateArgs),
    /// Evaluate at tau = 0.0, 0.1, ..., 1.0 and print CSV.
    Sweep(GateArgs),
    /// Remove each component in turn and print the ablation table.
    Ablate(GateArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Text to classify; repeatable. Without it, lines are read from --input or stdin.
    #[arg(long)]
    pub text: Vec<String>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Read canonical JSONL records instead of plain text lines.
    #[arg(long)]
    pub jsonl: bool,
    /// Attach an explanation to every decision.
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    /// Exit 2 unless the full framework beats primary-alone accuracy by 2 points.
    #[arg(long)]
    pub require_improvement: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CASCADE_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; 2 is reserved for the gate here
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            match failure {
                Failure::Operational(_) => ExitCode::from(1),
                Failure::Gate(_) => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = cli.common;
    let flags = Overrides {
        fixture: c.fixture,
        tau: c.tau,
        seed: c.seed,
        primary: c.primary,
        endpoint: c.endpoint,
        out: c.out,
        artifacts: c.artifacts,
    };
    let cfg = RunConfig::resolve(c.config.as_deref(), flags)?;
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Train => commands::train(&cfg, &mut stdout),
        Command::Classify(args) => commands::classify(&cfg, &args, &mut stdout),
        Command::Evaluate(gate) => commands::evaluate(&cfg, &gate, &mut stdout),
        Command::Sweep(gate) => commands::sweep(&cfg, &gate, &mut stdout),
        Command::Ablate(gate) => commands::ablate(&cfg, &gate, &mut stdout),
    }
}
