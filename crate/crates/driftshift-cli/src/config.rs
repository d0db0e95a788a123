//! Experiment configuration: a single JSON document with a schema version,
//! canonically hashed so reordered keys describe the same run.

use anyhow::{bail, Context};
use driftshift::sim::scenario::{ClassCond, ScenarioSpec, TrajectorySpec};
use driftshift::sim::presets;
use driftshift::space::MetricSpaceKind;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Either a named preset or a fully explicit scenario body; sizes and seeds
/// come from the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioTemplate {
    Preset(PresetTemplate),
    Explicit(ExplicitTemplate),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetTemplate {
    /// One of `stationary`, `slow-sine`, `j-jumps`, `tv-walk`.
    pub preset: String,
    /// Smoothness exponent for `slow-sine` (0.5, 1, or 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Segment count for `j-jumps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<usize>,
    /// Drift budget and exponent for `tv-walk`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_variation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_v: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitTemplate {
    pub space: MetricSpaceKind,
    pub class0: ClassCond,
    pub class1: ClassCond,
    pub trajectory: TrajectorySpec,
}

impl ScenarioTemplate {
    pub fn instantiate(&self, n: usize, t_len: usize, seed: u64) -> anyhow::Result<ScenarioSpec> {
        match self {
            ScenarioTemplate::Explicit(e) => Ok(ScenarioSpec {
                space: e.space.clone(),
                class0: e.class0.clone(),
                class1: e.class1.clone(),
                trajectory: e.trajectory.clone(),
                n0: n,
                n1: n,
                t_len,
                seed,
            }),
            ScenarioTemplate::Preset(p) => match p.preset.as_str() {
                "stationary" => Ok(presets::stationary(n, t_len, seed)),
                "slow-sine" => {
                    let beta = p.beta.unwrap_or(1.0);
                    Ok(presets::slow_sine(beta, n, t_len, seed)?)
                }
                "j-jumps" => {
                    let jumps = p.jumps.unwrap_or(4);
                    Ok(presets::j_jumps(jumps, n, t_len, seed)?)
                }
                "tv-walk" => {
                    let v = p.total_variation.unwrap_or(1.0);
                    let beta_v = p.beta_v.unwrap_or(1.0);
                    Ok(presets::tv_walk(v, beta_v, n, t_len, seed))
                }
                other => bail!("unknown preset '{other}' (field 'scenario.preset')"),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub delta: f64,
    pub beta_bar: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Labelled sample sizes (per class; each class draws `2n` points).
    pub n: Vec<usize>,
    /// Stream lengths.
    pub t: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for EtaGrid {
    fn default() -> Self {
        EtaGrid {
            lo: -4.0,
            hi: 4.0,
            count: 41,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: ScenarioTemplate,
    pub estimator: EstimatorConfig,
    pub sweep: SweepConfig,
    /// Output directory; `--out` overrides.
    pub outputs: String,
    /// Inclusive time intervals for regret averaging; defaults to the second
    /// half of each stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_grid: Option<EtaGrid>,
    #[serde(default)]
    pub emit_plots: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        if !(self.estimator.delta > 0.0 && self.estimator.delta < 1.0) {
            bail!("estimator.delta = {} must lie in (0, 1)", self.estimator.delta);
        }
        if self.estimator.beta_bar == 0 || self.estimator.beta_bar > 8 {
            bail!("estimator.beta_bar = {} must lie in 1..=8", self.estimator.beta_bar);
        }
        if self.sweep.n.is_empty() || self.sweep.t.is_empty() || self.sweep.seeds.is_empty() {
            bail!("sweep lists (n, t, seeds) must all be nonempty");
        }
        if self.sweep.n.iter().any(|&n| n == 0) {
            bail!("sweep.n entries must be positive");
        }
        if self.sweep.t.iter().any(|&t| t < 2) {
            bail!("sweep.t entries must be at least 2");
        }
        if let Some(grid) = &self.eta_grid {
            if grid.count == 0 || !(grid.lo < grid.hi) {
                bail!("eta_grid must have count >= 1 and lo < hi");
            }
        }
        if let Some(intervals) = &self.intervals {
            for &(lo, hi) in intervals {
                if lo < 1 || lo > hi {
                    bail!("interval [{lo}, {hi}] must satisfy 1 <= lo <= hi");
                }
            }
        }
        Ok(())
    }
}

/// Parse and validate a config document, reporting the line and column on
/// syntax errors.
pub fn load_config(text: &str) -> anyhow::Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        anyhow::anyhow!(
            "config error at line {} column {}: {}",
            e.line(),
            e.column(),
            e
        )
    })?;
    config.validate()?;
    Ok(config)
}

/// Canonical 64-bit hash of a config document: parse to a value (object keys
/// sort), re-serialise compactly, then FNV-1a. Key order in the source text
/// does not matter.
pub fn config_hash(text: &str) -> anyhow::Result<String> {
    let value: serde_json::Value =
        serde_json::from_str(text).context("hashing an unparsable config")?;
    let canonical = serde_json::to_string(&value).expect("value serialises");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Ok(format!("{h:016x}"))
}
