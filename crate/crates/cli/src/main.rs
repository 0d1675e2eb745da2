// SPDX-License-Identifier: MIT OR Apache-2.0

//! `virtue-bench`: scores explanations of small networks and writes the
//! comparison table, certificates, and frontier.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a stage fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use virtue_core::report::{self, RunConfig};
use virtue_core::Error;

const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.json");

#[derive(Debug, Parser)]
#[command(
    name = "virtue-bench",
    version,
    about = "Explanatory-virtue scoring for toy networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train, fit, score, prove, and write every artifact.
    Run(Common),
    /// Train, fit, and score; writes scorecards and the table.
    Score(Common),
    /// Train, fit, and prove; writes certificates and the frontier.
    Prove(Common),
    /// Rebuild the table from scorecards.json in the output directory.
    Table(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; the shipped default when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Train a single network with this seed instead of the configured ones.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::from_json(DEFAULT_CONFIG)?,
        };
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

fn configure_workers() -> Result<(), Error> {
    let Ok(value) = std::env::var("VB_WORKERS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("VB_WORKERS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

fn execute(cli: &Cli) -> Result<String, Error> {
    configure_workers()?;
    match &cli.command {
        Command::Run(c) => {
            let out = report::run(&c.load()?)?;
            Ok(out.table.render_text())
        }
        Command::Score(c) => Ok(report::run_score(&c.load()?)?.1.render_text()),
        Command::Prove(c) => {
            let proofs = report::run_prove(&c.load()?)?;
            let lines: Vec<String> = proofs
                .frontier
                .iter()
                .map(|p| format!("{}  {:.6}  {:>12}  {}", p.net, p.bound, p.flops, p.label))
                .collect();
            Ok(lines.join("\n") + "\n")
        }
        Command::Table(c) => Ok(report::run_table(&c.load()?)?.render_text()),
    }
}

fn error_report(e: &Error) -> serde_json::Value {
    let (stage, inner) = match e {
        Error::Stage { stage, source } => (Some(stage.as_str()), source.to_string()),
        other => (None, other.to_string()),
    };
    serde_json::json!({
        "kind": if e.is_validation() { "validation" } else { "pipeline" },
        "stage": stage,
        "message": inner,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_report(&e));
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
