//! Sweep execution: one worker per (n, t, seed) cell, each writing its own
//! CSV; the summary aggregation is a single-threaded reduce over results
//! sorted by cell key, so the output bytes do not depend on the pool size.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use driftshift::classifier::{build_state, prior_at, round_budget};
use driftshift::density_ratio::EtaEstimator;
use driftshift::sim::regret::PerTimeRegret;
use driftshift::sim::{theory_bounds, tv_label_path, RegretReport, Scenario, TheoryParams, TrajectorySpec};
use driftshift::space::Point;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EtaGrid, ExperimentConfig};
use crate::output::{plot_script, CsvField, CsvWriter};

/// Marker for unwritable-output failures (exit code 3).
#[derive(Debug)]
pub struct OutputError(pub String);

impl fmt::Display for OutputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot write output: {}", self.0)
    }
}

impl std::error::Error for OutputError {}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    std::fs::write(path, content)
        .map_err(|e| anyhow::Error::new(OutputError(format!("{}: {e}", path.display()))))
}

pub struct RunContext {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub command: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    n: usize,
    t_len: usize,
    seed: u64,
}

struct CellOutput {
    key: CellKey,
    csv_name: String,
    csv_text: String,
    intervals: Vec<IntervalRegret>,
}

#[derive(Debug, Clone, Serialize)]
struct IntervalRegret {
    lo: usize,
    hi: usize,
    averaged_regret: f64,
}

#[derive(Serialize)]
struct CellSummary {
    n: usize,
    t_len: usize,
    seed: u64,
    csv: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    intervals: Vec<IntervalRegret>,
}

#[derive(Serialize)]
struct Aggregate {
    n: usize,
    t_len: usize,
    interval: (usize, usize),
    median_averaged_regret: f64,
    mean_averaged_regret: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    overlay: Option<Overlay>,
}

#[derive(Serialize, Clone)]
struct Overlay {
    labelled_rate: f64,
    unlabelled_rate: f64,
    jump_regret_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tv_regret_rhs: Option<f64>,
    note: String,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    command: String,
    config_hash: String,
    cells: Vec<CellSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    aggregates: Vec<Aggregate>,
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    command: String,
    config_hash: String,
    code_version: String,
    jobs: usize,
    seeds: Vec<u64>,
    wall_clock_secs: f64,
    outputs: Vec<String>,
}

fn cells_of(config: &ExperimentConfig) -> Vec<CellKey> {
    let mut cells = Vec::new();
    for &n in &config.sweep.n {
        for &t_len in &config.sweep.t {
            for &seed in &config.sweep.seeds {
                cells.push(CellKey { n, t_len, seed });
            }
        }
    }
    cells
}

fn intervals_for(config: &ExperimentConfig, t_len: usize) -> Vec<(usize, usize)> {
    match &config.intervals {
        Some(list) => list.clone(),
        None => vec![(t_len / 2, t_len - 1)],
    }
}

fn run_cells<F>(ctx: &RunContext, runner: F) -> anyhow::Result<Vec<CellOutput>>
where
    F: Fn(CellKey) -> anyhow::Result<CellOutput> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .context("building the worker pool")?;
    let cells = cells_of(&ctx.config);
    let mut outputs: Vec<CellOutput> = pool.install(|| {
        cells
            .par_iter()
            .map(|&key| runner(key))
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    outputs.sort_by_key(|c| c.key);
    Ok(outputs)
}

fn finalize(
    ctx: &RunContext,
    outputs: Vec<CellOutput>,
    aggregates: Vec<Aggregate>,
    started: Instant,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(&ctx.out_dir)
        .map_err(|e| anyhow::Error::new(OutputError(format!("{}: {e}", ctx.out_dir.display()))))?;
    let mut written = Vec::new();
    for cell in &outputs {
        let path = ctx.out_dir.join(&cell.csv_name);
        write_file(&path, &cell.csv_text)?;
        written.push(cell.csv_name.clone());
    }
    let summary = Summary {
        schema_version: crate::config::SCHEMA_VERSION,
        command: ctx.command.to_string(),
        config_hash: ctx.config_hash.clone(),
        cells: outputs
            .iter()
            .map(|c| CellSummary {
                n: c.key.n,
                t_len: c.key.t_len,
                seed: c.key.seed,
                csv: c.csv_name.clone(),
                intervals: c.intervals.clone(),
            })
            .collect(),
        aggregates,
    };
    let summary_text = serde_json::to_string_pretty(&summary).expect("summary serialises");
    write_file(&ctx.out_dir.join("summary.json"), &summary_text)?;
    written.push("summary.json".into());

    if ctx.config.emit_plots && ctx.command == "run" {
        let csvs: Vec<String> = outputs.iter().map(|c| c.csv_name.clone()).collect();
        write_file(&ctx.out_dir.join("plot.gp"), &plot_script(&csvs))?;
        written.push("plot.gp".into());
    }

    let manifest = Manifest {
        schema_version: crate::config::SCHEMA_VERSION,
        command: ctx.command.to_string(),
        config_hash: ctx.config_hash.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        jobs: ctx.jobs,
        seeds: ctx.config.sweep.seeds.clone(),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        outputs: written,
    };
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_file(&ctx.out_dir.join("manifest.json"), &manifest_text)?;
    Ok(())
}

// Map the generating trajectory onto overlay parameters with unit constants:
// the margin exponent defaults to 2, smoothly drifting paths report their
// certified exponent and constant, jump paths report their segment count.
fn overlay_for(
    scenario: &Scenario,
    n: usize,
    delta: f64,
    interval: (usize, usize),
) -> Option<Overlay> {
    let tv = scenario.tv_oracle().ok()?;
    let (alpha, c_alpha, jumps) = match &scenario.spec().trajectory {
        TrajectorySpec::Constant { .. } => (1.0, 0.0, 1.0),
        TrajectorySpec::Holder { beta, constant, .. } => (*beta, *constant, 1.0),
        TrajectorySpec::PiecewiseJumps { segments } => (0.0, 0.0, segments.len() as f64),
        TrajectorySpec::TvBudget { beta_v, .. } => (*beta_v, 0.0, 1.0),
    };
    let len = (interval.1 - interval.0 + 1) as f64;
    let v_total = tv_label_path(scenario.pis(), alpha.max(1.0), interval).ok();
    let params = TheoryParams {
        n_min: n,
        window: interval.1 - interval.0 + 1,
        delta,
        tv,
        gamma: 1.0,
        c_gamma: 1.0,
        alpha,
        c_alpha,
        kappa: 2.0,
        t_len: len,
        jumps,
        t_max: interval.1 as f64,
        v_total,
    };
    let b = theory_bounds(&params).ok()?;
    Some(Overlay {
        labelled_rate: b.labelled_rate,
        unlabelled_rate: b.unlabelled_rate,
        jump_regret_rhs: b.jump_regret_rhs,
        tv_regret_rhs: b.tv_regret_rhs,
        note: b.note,
    })
}

fn median_of(sorted: &[f64]) -> f64 {
    sorted[sorted.len() / 2]
}

/// Full policy run: per-time exact errors against the oracle, regret
/// averages per interval, and overlays per sweep point.
pub fn cmd_run(ctx: &RunContext) -> anyhow::Result<()> {
    let started = Instant::now();
    let outputs = run_cells(ctx, |key| regret_cell(&ctx.config, key))?;

    // aggregate per (n, t_len, interval)
    let mut aggregates = Vec::new();
    let mut points: Vec<(usize, usize)> = outputs.iter().map(|c| (c.key.n, c.key.t_len)).collect();
    points.dedup();
    for (n, t_len) in points {
        for (idx, &interval) in intervals_for(&ctx.config, t_len).iter().enumerate() {
            let mut values: Vec<f64> = outputs
                .iter()
                .filter(|c| c.key.n == n && c.key.t_len == t_len)
                .map(|c| c.intervals[idx].averaged_regret)
                .collect();
            values.sort_by(f64::total_cmp);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let overlay = ctx
                .config
                .scenario
                .instantiate(n, t_len, ctx.config.sweep.seeds[0])
                .ok()
                .and_then(|spec| Scenario::new(spec).ok())
                .and_then(|sc| overlay_for(&sc, n, ctx.config.estimator.delta, interval));
            aggregates.push(Aggregate {
                n,
                t_len,
                interval,
                median_averaged_regret: median_of(&values),
                mean_averaged_regret: mean,
                overlay,
            });
        }
    }
    finalize(ctx, outputs, aggregates, started)
}

fn regret_cell(config: &ExperimentConfig, key: CellKey) -> anyhow::Result<CellOutput> {
    let spec = config.scenario.instantiate(key.n, key.t_len, key.seed)?;
    let scenario = Scenario::new(spec)?;
    let (pool, stream) = scenario.generate()?;
    let delta = config.estimator.delta;
    let state = build_state(
        &pool,
        stream.covariates(),
        delta,
        config.estimator.beta_bar,
        &scenario.spec().space,
    )?;
    let mut csv = CsvWriter::new(&[
        "t",
        "test_error",
        "bayes_error",
        "excess",
        "pi_true",
        "pi_hat",
        "q_hat",
    ]);
    let mut per_time = Vec::with_capacity(key.t_len - 1);
    for t in 1..key.t_len {
        let budget = round_budget(delta, t);
        let (pi_hat, q_hat) = prior_at(&state, t, budget.delta_t)?;
        let rule = |x: &Point| {
            let eta = state
                .eta_at(x)
                .expect("query point matches the scenario space");
            u8::from(eta.value + pi_hat > 1.0)
        };
        let test_error = scenario.test_error(t, &rule)?;
        let bayes_error = scenario.bayes_error(t)?;
        per_time.push(PerTimeRegret::new(t, test_error, bayes_error)?);
        csv.row(&[
            CsvField::Int(t as i64),
            CsvField::Float(test_error),
            CsvField::Float(bayes_error),
            CsvField::Float(test_error - bayes_error),
            CsvField::Float(scenario.pi_at(t)?),
            CsvField::Float(pi_hat),
            CsvField::Int(q_hat as i64),
        ]);
    }
    let mut intervals = Vec::new();
    for interval in intervals_for(config, key.t_len) {
        let report = RegretReport::new(per_time.clone(), interval)?;
        intervals.push(IntervalRegret {
            lo: interval.0,
            hi: interval.1,
            averaged_regret: report.averaged,
        });
    }
    Ok(CellOutput {
        key,
        csv_name: format!("regret_n{}_T{}_seed{}.csv", key.n, key.t_len, key.seed),
        csv_text: csv.finish(),
        intervals,
    })
}

/// Label-probability stage in isolation: per-time truth, estimate, and the
/// selected window.
pub fn cmd_estimate_pi(ctx: &RunContext) -> anyhow::Result<()> {
    let started = Instant::now();
    let outputs = run_cells(ctx, |key| pi_cell(&ctx.config, key))?;
    finalize(ctx, outputs, Vec::new(), started)
}

fn pi_cell(config: &ExperimentConfig, key: CellKey) -> anyhow::Result<CellOutput> {
    let spec = config.scenario.instantiate(key.n, key.t_len, key.seed)?;
    let scenario = Scenario::new(spec)?;
    let (pool, stream) = scenario.generate()?;
    let delta = config.estimator.delta;
    let state = build_state(
        &pool,
        stream.covariates(),
        delta,
        config.estimator.beta_bar,
        &scenario.spec().space,
    )?;
    let mut csv = CsvWriter::new(&["t", "pi_true", "pi_hat", "q_hat", "abs_err"]);
    for t in 1..key.t_len {
        let budget = round_budget(delta, t);
        let (pi_hat, q_hat) = prior_at(&state, t, budget.delta_t)?;
        let pi_true = scenario.pi_at(t)?;
        csv.row(&[
            CsvField::Int(t as i64),
            CsvField::Float(pi_true),
            CsvField::Float(pi_hat),
            CsvField::Int(q_hat as i64),
            CsvField::Float((pi_hat - pi_true).abs()),
        ]);
    }
    Ok(CellOutput {
        key,
        csv_name: format!("pi_n{}_T{}_seed{}.csv", key.n, key.t_len, key.seed),
        csv_text: csv.finish(),
        intervals: Vec::new(),
    })
}

/// Density-ratio stage in isolation: the estimate against the oracle over a
/// query grid (the scalar grid on the line, the whole alphabet otherwise).
pub fn cmd_estimate_eta(ctx: &RunContext, grid_override: Option<EtaGrid>) -> anyhow::Result<()> {
    let started = Instant::now();
    let grid = grid_override
        .or(ctx.config.eta_grid)
        .unwrap_or_default();
    let outputs = run_cells(ctx, |key| eta_cell(&ctx.config, key, grid))?;
    finalize(ctx, outputs, Vec::new(), started)
}

fn eta_cell(config: &ExperimentConfig, key: CellKey, grid: EtaGrid) -> anyhow::Result<CellOutput> {
    let spec = config.scenario.instantiate(key.n, key.t_len, key.seed)?;
    let scenario = Scenario::new(spec)?;
    let (pool, _) = scenario.generate()?;
    let est = EtaEstimator::new(&pool, &scenario.spec().space, config.estimator.delta)?;
    let queries: Vec<Point> = match scenario.spec().space.alphabet_size() {
        Some(k) => (0..k).map(Point::Symbol).collect(),
        None => (0..grid.count)
            .map(|i| {
                let frac = if grid.count == 1 {
                    0.5
                } else {
                    i as f64 / (grid.count - 1) as f64
                };
                Point::scalar(grid.lo + (grid.hi - grid.lo) * frac)
            })
            .collect(),
    };
    let mut csv = CsvWriter::new(&["x", "eta_true", "eta_hat", "chosen_radius"]);
    for q in &queries {
        let truth = scenario.eta_oracle(q)?.value;
        let e = est.eta_at(q)?;
        let coord = match q {
            Point::Scalar(v) => *v,
            Point::Symbol(s) => *s as f64,
            Point::Vector(_) => f64::NAN,
        };
        csv.row(&[
            CsvField::Float(coord),
            CsvField::Float(truth),
            CsvField::Float(e.value),
            CsvField::Float(e.chosen_radius),
        ]);
    }
    Ok(CellOutput {
        key,
        csv_name: format!("eta_n{}_T{}_seed{}.csv", key.n, key.t_len, key.seed),
        csv_text: csv.finish(),
        intervals: Vec::new(),
    })
}

/// The release gate: run the invariant suite and print one line per check.
pub fn cmd_selftest() -> i32 {
    let outcomes = driftshift::selftest::run_all();
    let mut failed = Vec::new();
    for o in &outcomes {
        let mark = if o.passed { " ok " } else { "FAIL" };
        println!("[{mark}] {:<32} {}", o.name, o.detail);
        if !o.passed {
            failed.push(o.name);
        }
    }
    if failed.is_empty() {
        println!("selftest: all {} checks passed", outcomes.len());
        0
    } else {
        eprintln!("selftest: {} check(s) failed: {}", failed.len(), failed.join(", "));
        1
    }
}
