//! Experiment runner for the adaptive label-shift estimators.
//!
//! Subcommands: `run` (full policy with exact regret accounting),
//! `estimate-pi` and `estimate-eta` (stage isolation), `selftest` (the
//! invariant gate). Exit codes: 0 success, 1 runtime failure, 2 malformed
//! config, 3 unwritable output.

mod config;
mod output;
mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{config_hash, load_config, EtaGrid};
use runner::{cmd_estimate_eta, cmd_estimate_pi, cmd_run, cmd_selftest, OutputError, RunContext};

#[derive(Parser)]
#[command(name = "driftshift", version, about = "Seeded label-shift experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `outputs` field.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seed list overriding the config sweep.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Worker count; defaults to DRIFTSHIFT_JOBS, then to the core count.
    #[arg(long)]
    jobs: Option<usize>,
    /// Emit a gnuplot script alongside the CSVs.
    #[arg(long)]
    emit_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sequential policy and write per-time regret CSVs.
    Run(CommonArgs),
    /// Run only the label-probability estimator over the stream.
    EstimatePi(CommonArgs),
    /// Run only the density-ratio estimator over a query grid.
    EstimateEta {
        #[command(flatten)]
        common: CommonArgs,
        /// Query grid as `lo:hi:count` (overrides the config).
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Selftest,
}

fn parse_grid(text: &str) -> anyhow::Result<EtaGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        anyhow::bail!("grid must be lo:hi:count, got '{text}'");
    }
    let grid = EtaGrid {
        lo: parts[0].parse()?,
        hi: parts[1].parse()?,
        count: parts[2].parse()?,
    };
    if grid.count == 0 || !(grid.lo < grid.hi) {
        anyhow::bail!("grid must have count >= 1 and lo < hi");
    }
    Ok(grid)
}

fn default_jobs() -> usize {
    std::env::var("DRIFTSHIFT_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&j| j > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
}

fn build_context(common: &CommonArgs, command: &'static str) -> Result<RunContext, (i32, String)> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| (2, format!("cannot read config {}: {e}", common.config.display())))?;
    let mut config = load_config(&text).map_err(|e| (2, format!("{e:#}")))?;
    let hash = config_hash(&text).map_err(|e| (2, format!("{e:#}")))?;
    if let Some(seeds) = &common.seeds {
        if seeds.is_empty() {
            return Err((2, "--seeds override must be nonempty".into()));
        }
        config.sweep.seeds = seeds.clone();
    }
    if common.emit_plots {
        config.emit_plots = true;
    }
    let out_dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.outputs));
    Ok(RunContext {
        config,
        config_hash: hash,
        out_dir,
        jobs: common.jobs.unwrap_or_else(default_jobs),
        command,
    })
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<OutputError>().is_some() {
        3
    } else {
        1
    }
}

fn dispatch(cli: Cli) -> i32 {
    let run = |common: &CommonArgs,
               command: &'static str,
               f: &dyn Fn(&RunContext) -> anyhow::Result<()>| {
        match build_context(common, command) {
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                code
            }
            Ok(ctx) => match f(&ctx) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    exit_code_for(&e)
                }
            },
        }
    };
    match &cli.command {
        Command::Run(common) => run(common, "run", &cmd_run),
        Command::EstimatePi(common) => run(common, "estimate-pi", &cmd_estimate_pi),
        Command::EstimateEta { common, grid } => {
            let grid = match grid.as_deref().map(parse_grid).transpose() {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return 2;
                }
            };
            run(common, "estimate-eta", &move |ctx| {
                cmd_estimate_eta(ctx, grid)
            })
        }
        Command::Selftest => cmd_selftest(),
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(cli));
}
