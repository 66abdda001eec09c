//! Batch front end for rfh-core: a JSON configuration, one subcommand per
//! process, CSV tables with JSON sidecars in the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use output::OutputDir;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "rfh", version, about = "Random-field Hartree numerics: steady states, response symbols, dynamics and fixed points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed offset for random perturbation shapes (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Radial profile h_f, tail fit, L¹ norm and steady density.
    Steady,
    /// Response symbol table, log-term residuals and smallness criteria.
    Response,
    /// Self-consistent evolution of a perturbation.
    Simulate,
    /// Fixed-point iteration for the perturbation density.
    Fixedpoint,
    /// Direct versus multiplier response under refinement.
    Crosscheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Response => "response",
            Command::Simulate => "simulate",
            Command::Fixedpoint => "fixedpoint",
            Command::Crosscheck => "crosscheck",
        }
    }
}

/// Loads, overrides and validates the configuration.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one subcommand; the resolved configuration is written first as
/// `resolved_config.json`.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = resolve_config(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be ≥ 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let provenance = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "dim": cfg.dim,
        "grid": cfg.grid,
        "quadrature": cfg.quadrature,
        "symbol": cfg.symbol,
        "seed": cfg.seed,
    });
    let out = OutputDir::create(&cfg.output, provenance)?;
    out.write_text("resolved_config.json", &cfg.echo())?;
    pool.install(|| match cli.command {
        Command::Steady => commands::steady(&cfg, &out),
        Command::Response => commands::response(&cfg, &out),
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Fixedpoint => commands::fixedpoint(&cfg, &out),
        Command::Crosscheck => commands::crosscheck(&cfg, &out),
    })
}
