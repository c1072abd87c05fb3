//! `telefock`: config-driven runner for the conditional teleportation
//! simulator.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{hash_inputs, OutputDir, RunManifest};

#[derive(Parser)]
#[command(
    name = "telefock",
    version,
    about = "Conditional CV teleportation in truncated Fock space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Teleport the input at each conditioning radius.
    Teleport(RunArgs),
    /// Success probability P(L) against the two-mode-vacuum curve.
    Curve(RunArgs),
    /// Homodyne tomography from records or simulated data.
    Tomo(RunArgs),
    /// Programmable conditional filter.
    Filter(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = "TELEFOCK_WORKERS")]
    workers: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

type Body = fn(&mut Context<'_>) -> CliResult<serde_json::Value>;

/// Runs one command and always writes `manifest.json`, also on failure.
fn run(name: &str, args: &RunArgs, body: Body) -> CliResult<()> {
    let start = Instant::now();
    let mut out = OutputDir::create(&args.out)?;
    let mut manifest = RunManifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed.unwrap_or(0),
        workers: 0,
        config: serde_json::Value::Null,
        inputs: Vec::new(),
        input_hash: String::new(),
        outputs: Vec::new(),
        wall_clock_seconds: 0.0,
        diagnostics: serde_json::Value::Null,
        error: None,
        exit_code: 0,
    };
    let result = execute(args, body, &mut out, &mut manifest);
    manifest.outputs = out.written().to_vec();
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    match &result {
        Ok(d) => manifest.diagnostics = d.clone(),
        Err(e) => {
            manifest.error = Some(e.to_string());
            manifest.exit_code = e.exit_code();
        }
    }
    out.finish(&manifest)?;
    result.map(|_| ())
}

fn execute(
    args: &RunArgs,
    body: Body,
    out: &mut OutputDir,
    manifest: &mut RunManifest,
) -> CliResult<serde_json::Value> {
    let workers = match args.workers {
        Some(0) => return Err(CliError::config(&args.config, "--workers must be ≥ 1")),
        Some(n) => n,
        None => rayon::current_num_threads(),
    };
    manifest.workers = workers;
    let loaded = LoadedConfig::load(&args.config)?;
    manifest.seed = loaded.seed(args.seed);
    manifest.config = serde_json::to_value(&loaded.config).map_err(telefock::Error::from)?;
    let mut files = vec![args.config.clone()];
    files.extend(loaded.referenced_files());
    (manifest.inputs, manifest.input_hash) = hash_inputs(&files)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(&args.config, e.to_string()))?;
    let mut ctx = Context {
        loaded,
        seed: manifest.seed,
        out,
    };
    pool.install(|| body(&mut ctx))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Teleport(a) => run("teleport", a, commands::teleport::run),
        Command::Curve(a) => run("curve", a, commands::curve::run),
        Command::Tomo(a) => run("tomo", a, commands::tomo::run),
        Command::Filter(a) => run("filter", a, commands::filter::run),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
