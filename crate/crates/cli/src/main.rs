// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! `cqed`: run SQUID cavity-QED scenarios and write plot-ready tables.
//!
//! Exit codes: 0 success, 1 a physics check failed, 2 usage or config error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{BackendKind, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Physics(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Physics(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cqed", version, about = "Cavity-QED simulation of rf-SQUID qubits")]
struct Cli {
    /// Scenario file (flat TOML, unit-suffixed keys); the built-in default otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the output tables and run.log.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for scans (default: available processors).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the scenario's backend.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Solve the SQUID level structure.
    Spectrum,
    /// Run a pulse schedule and check it against its truth table.
    Gate,
    /// Sweep an approximation parameter and record the error.
    Scan,
    /// Cavity quality-factor requirement.
    Feasibility,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Gate => "gate",
            Command::Scan => "scan",
            Command::Feasibility => "feasibility",
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            ScenarioConfig::parse(&text)?
        }
        None => ScenarioConfig::builtin(),
    };
    if let Some(b) = cli.backend {
        cfg.backend = Some(b);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let threads = match cli.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&cli.out).map_err(|source| CliError::Io {
        path: cli.out.clone(),
        source,
    })?;
    let ctx = commands::Context::new(cli.command.name(), &cfg, &cli.out, pool.current_num_threads());
    let result = pool.install(|| match cli.command {
        Command::Spectrum => commands::spectrum(&ctx),
        Command::Gate => commands::gate(&ctx),
        Command::Scan => commands::scan(&ctx),
        Command::Feasibility => commands::feasibility(&ctx),
    });
    ctx.write_log(&result)?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqed {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
