//! Batch front end for the scheduling library: validate datasets, run
//! optimization campaigns, decode genomes into schedules, sweep uncertainty
//! settings, and compare algorithms. Artifact-producing commands write a
//! `manifest.json` (status `running`) before any other file and rewrite it
//! as `complete` at the end, so an interrupted campaign is recognizable.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use stitchplan::Algorithm;

mod commands;

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    match s {
        "nsjade" => Ok(Algorithm::Nsjade),
        "nsga2" => Ok(Algorithm::Nsga2),
        "jade" => Ok(Algorithm::Jade),
        other => Err(format!("unknown algorithm {other:?} (expected nsjade, nsga2, or jade)")),
    }
}

#[derive(Parser)]
#[command(
    name = "stitchplan",
    version,
    about = "Robust multi-line order scheduling: dataset checks, Pareto search, schedule decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset file and print its resolved scheduling snapshot
    Validate(ValidateArgs),
    /// Run one optimization campaign and write its artifacts
    Optimize(OptimizeArgs),
    /// Decode a genome file into a schedule, score it, and write its charts
    Decode(DecodeArgs),
    /// Run one campaign per (beta, H) combination and collect the fronts
    Sweep(SweepArgs),
    /// Run several algorithms on the same seeds and compare boundary points
    Compare(CompareArgs),
}

/// Dataset selection shared by every subcommand.
#[derive(Args)]
struct DataArgs {
    /// Dataset JSON file
    #[arg(long)]
    dataset: PathBuf,

    /// Event-progress snapshot day to resolve (defaults to the file's own)
    #[arg(long, allow_negative_numbers = true)]
    sday: Option<i64>,

    /// Treat every pre-production event as already finished
    #[arg(long)]
    no_events: bool,
}

/// Search-budget and evaluation flags shared by the campaign commands.
#[derive(Args)]
struct SearchArgs {
    /// Population size
    #[arg(long, default_value_t = 400)]
    np: usize,

    /// Generations per genome dimension (budget = xi * 4n unless --gmax)
    #[arg(long, default_value_t = 10)]
    xi: usize,

    /// Explicit generation budget, overriding --xi
    #[arg(long)]
    gmax: Option<usize>,

    /// Independent runs; run i uses seed --seed + i
    #[arg(long, default_value_t = 30)]
    runs: usize,

    /// Base seed
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Worker threads for evaluation (default: one per CPU)
    #[arg(long)]
    jobs: Option<usize>,

    /// Output directory (the STITCHPLAN_OUT environment variable overrides this)
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Search algorithm
    #[arg(long, value_parser = parse_algorithm, default_value = "nsjade")]
    algo: Algorithm,

    /// Daily-quantity noise half-width
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    beta: Vec<f64>,

    /// Noise realizations averaged per evaluation
    #[arg(long = "H", value_delimiter = ',', default_value = "5")]
    h: Vec<u32>,

    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Genome file: a JSON array of 4n gene values
    #[arg(long)]
    genome: PathBuf,

    /// Noise half-width for the robust re-measurement (0 skips it)
    #[arg(long, default_value_t = 0.0)]
    beta: f64,

    /// Noise realizations averaged in the robust re-measurement
    #[arg(long = "H", default_value_t = 5)]
    h: u32,

    /// Evaluation seed for the robust re-measurement
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output directory (the STITCHPLAN_OUT environment variable overrides this)
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Search algorithm
    #[arg(long, value_parser = parse_algorithm, default_value = "nsjade")]
    algo: Algorithm,

    /// Noise half-widths to sweep
    #[arg(long, value_delimiter = ',', default_value = "0.2")]
    beta: Vec<f64>,

    /// Sample counts to sweep
    #[arg(long = "H", value_delimiter = ',', default_value = "5")]
    h: Vec<u32>,

    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Algorithms to compare on identical seeds
    #[arg(long, value_parser = parse_algorithm, value_delimiter = ',', default_value = "nsga2,nsjade")]
    algo: Vec<Algorithm>,

    /// Noise half-width
    #[arg(long, default_value_t = 0.2)]
    beta: f64,

    /// Noise realizations averaged per evaluation
    #[arg(long = "H", default_value_t = 5)]
    h: u32,

    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    data: DataArgs,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let jobs = match &cli.command {
        Command::Optimize(a) => a.search.jobs,
        Command::Sweep(a) => a.search.jobs,
        Command::Compare(a) => a.search.jobs,
        _ => None,
    };
    if let Some(jobs) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Validate(args) => commands::validate(args),
        Command::Optimize(args) => commands::optimize(args),
        Command::Decode(args) => commands::decode(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Compare(args) => commands::compare(args),
    }
}
