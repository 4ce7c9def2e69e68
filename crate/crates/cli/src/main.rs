//! Command-line front end for the memory-conversion simulator.

mod commands;
mod context;
mod error;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::table1::TableMode;
use crate::context::RunContext;
use crate::error::AppResult;

#[derive(Parser)]
#[command(
    name = "dlcz-telecom",
    version,
    about = "Simulator and analysis toolkit for a DLCZ quantum memory with a telecom-converted heralding photon"
)]
struct Cli {
    /// Run configuration file (TOML); calibrated defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker thread count; changes speed, never output.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Trial count override for simulating commands.
    #[arg(long, global = true)]
    trials: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conversion efficiency, noise, and SNR versus pump power.
    QfcCurve,
    /// SNR versus mean input photon number at fixed pump power.
    SnrCurve,
    /// Cross-correlations and derived bounds versus write pulse power.
    Correlations,
    /// Retrieval efficiency and cross-correlation versus storage time,
    /// with decay fits.
    StorageDecay,
    /// Correlation table re-analysis (mode a) or synthetic version (mode b).
    Table1 {
        #[arg(long, value_enum, default_value_t = Mode::A)]
        mode: Mode,
    },
    /// Equivalent fiber lengths, crossover distance, storage-time reach.
    LinkBudget,
    /// One simulation run with full tallies and estimates.
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    A,
    B,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::QfcCurve => "qfc-curve",
            Command::SnrCurve => "snr-curve",
            Command::Correlations => "correlations",
            Command::StorageDecay => "storage-decay",
            Command::Table1 { .. } => "table1",
            Command::LinkBudget => "link-budget",
            Command::Simulate => "simulate",
        }
    }
}

fn run(cli: &Cli) -> AppResult<()> {
    if let Some(workers) = cli.workers {
        // One global pool for the whole run; per-trial streams keep the
        // output independent of the worker count.
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| error::AppError::Config(format!("--workers: {e}")))?;
    }
    let ctx = RunContext::prepare(
        cli.command.name(),
        cli.config.as_deref(),
        &cli.out,
        cli.seed,
        cli.trials,
        cli.workers,
    )?;
    match &cli.command {
        Command::QfcCurve => commands::qfc_curve::run(&ctx),
        Command::SnrCurve => commands::snr_curve::run(&ctx),
        Command::Correlations => commands::correlations::run(&ctx),
        Command::StorageDecay => commands::storage_decay::run(&ctx),
        Command::Table1 { mode } => commands::table1::run(
            &ctx,
            match mode {
                Mode::A => TableMode::Published,
                Mode::B => TableMode::Simulated,
            },
        ),
        Command::LinkBudget => commands::link_budget::run(&ctx),
        Command::Simulate => commands::simulate::run(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
