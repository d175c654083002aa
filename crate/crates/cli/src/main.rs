//! `otto` — four-stroke coupled-spin engine simulator.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use otto_cli::commands;
use otto_cli::config::RunConfig;
use otto_cli::output::{Format, Table};

#[derive(Parser)]
#[command(
    name = "otto",
    about = "Four-stroke quantum Otto engine for a coupled spin pair",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Seed for the randomized validation battery.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the sampled trajectory of one cycle.
    Simulate(Common),
    /// Solve the limit cycle and emit its summary row.
    LimitCycle(Common),
    /// Limit-cycle summaries over a parameter grid.
    Sweep(Common),
    /// Maximize power over the branch time allocation.
    Optimize(Common),
    /// Run the invariant battery and report pass/fail per check.
    Validate(Common),
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // the global pool can only be sized once; later calls are no-ops
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn load_config(common: &Common) -> anyhow::Result<RunConfig> {
    let path = common
        .config
        .as_ref()
        .context("--config <path> is required for this command")?;
    RunConfig::load(path)
}

fn emit(table: &Table, common: &Common) -> anyhow::Result<()> {
    let format = Format::parse(&common.format)?;
    let text = table.render(format);
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(common) => {
            init_threads(common.threads);
            let table = commands::cmd_simulate(&load_config(&common)?)?;
            emit(&table, &common)
        }
        Command::LimitCycle(common) => {
            init_threads(common.threads);
            let table = commands::cmd_limit_cycle(&load_config(&common)?)?;
            emit(&table, &common)
        }
        Command::Sweep(common) => {
            init_threads(common.threads);
            let (table, any_ok) = commands::cmd_sweep(&load_config(&common)?)?;
            emit(&table, &common)?;
            if !any_ok {
                anyhow::bail!("every sweep point failed");
            }
            Ok(())
        }
        Command::Optimize(common) => {
            init_threads(common.threads);
            let table = commands::cmd_optimize(&load_config(&common)?)?;
            emit(&table, &common)
        }
        Command::Validate(common) => {
            init_threads(common.threads);
            let (table, report, passed) = commands::cmd_validate(common.seed)?;
            eprint!("{report}");
            if common.out.is_some() {
                emit(&table, &common)?;
            }
            if !passed {
                anyhow::bail!("validation failed");
            }
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
