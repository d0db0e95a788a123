//! The plug-in classifier and the sequential policy.
//!
//! One state is built per labelled pool: the density-ratio estimator on the
//! first halves, the induced indicator's second-half class means, and the
//! indicator traced over the unlabelled stream. Each round then re-estimates
//! the label probability from the trace and thresholds `eta + pi > 1`.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::data::LabeledPool;
use crate::density_ratio::{EtaEstimate, EtaEstimator};
use crate::error::{Error, Result};
use crate::label_prob::{lepski_window, prior_estimate, FunctionalTrace};
use crate::space::{MetricSpaceKind, Point};

/// Bit-exact cache key for query points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PointKey {
    Scalar(u64),
    Vector(Vec<u64>),
    Symbol(usize),
}

impl PointKey {
    fn of(p: &Point) -> Self {
        match p {
            Point::Scalar(x) => PointKey::Scalar(x.to_bits()),
            Point::Vector(v) => PointKey::Vector(v.iter().map(|x| x.to_bits()).collect()),
            Point::Symbol(s) => PointKey::Symbol(*s),
        }
    }
}

/// Everything the sequential policy precomputes from the labelled pool and
/// the stream prefix.
pub struct ClassifierState {
    eta: EtaEstimator,
    eta_cache: RwLock<HashMap<PointKey, EtaEstimate>>,
    f_trace: FunctionalTrace,
    mean_f0: f64,
    mean_f1: f64,
    delta: f64,
    beta_bar: usize,
}

impl ClassifierState {
    pub fn mean_f0(&self) -> f64 {
        self.mean_f0
    }

    pub fn mean_f1(&self) -> f64 {
        self.mean_f1
    }

    pub fn trace(&self) -> &FunctionalTrace {
        &self.f_trace
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta_bar(&self) -> usize {
        self.beta_bar
    }

    /// The underlying density-ratio estimator, for callers that manage
    /// their own memoisation.
    pub fn eta_estimator(&self) -> &EtaEstimator {
        &self.eta
    }

    /// Density-ratio estimate at `x`, memoised by exact coordinates. The
    /// cache is an optimisation only; the estimator is deterministic.
    pub fn eta_at(&self, x: &Point) -> Result<EtaEstimate> {
        let key = PointKey::of(x);
        if let Some(hit) = self.eta_cache.read().expect("cache lock").get(&key) {
            return Ok(*hit);
        }
        let est = self.eta.eta_at(x)?;
        self.eta_cache
            .write()
            .expect("cache lock")
            .insert(key, est);
        Ok(est)
    }
}

/// A single round's output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    pub pi_hat: f64,
    pub eta_at_x: f64,
    pub q_hat: usize,
}

fn decide(eta: f64, pi: f64) -> u8 {
    u8::from(eta + pi > 1.0)
}

/// Build the classifier state: the ratio estimator on the first halves, the
/// indicator's second-half means, and the indicator trace over the prefix.
pub fn build_state(
    pool: &LabeledPool,
    stream_prefix: &[Point],
    delta: f64,
    beta_bar: usize,
    space: &MetricSpaceKind,
) -> Result<ClassifierState> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    let eta = EtaEstimator::new(pool, space, delta)?;
    let f = |p: &Point| -> Result<f64> { Ok(f64::from(eta.f_at(p)?)) };
    // second-half means of the indicator, computed once
    let mut mean = [0.0f64; 2];
    for y in 0..2u8 {
        let mut acc = 0.0;
        for p in pool.second_half(y) {
            acc += f(p)?;
        }
        mean[y as usize] = acc / pool.second_half(y).len() as f64;
    }
    let mut f_trace = FunctionalTrace::new();
    for p in stream_prefix {
        f_trace.push(f(p)?);
    }
    Ok(ClassifierState {
        eta,
        eta_cache: RwLock::new(HashMap::new()),
        f_trace,
        mean_f0: mean[0],
        mean_f1: mean[1],
        delta,
        beta_bar,
    })
}

/// The round-`t` label-probability estimate and its selected window,
/// independent of any query point.
pub fn prior_at(state: &ClassifierState, t: usize, delta_t: f64) -> Result<(f64, usize)> {
    let sel = lepski_window(&state.f_trace, t, delta_t, state.beta_bar)?;
    let prior = prior_estimate(sel.mu_hat(), state.mean_f0, state.mean_f1);
    Ok((prior.pi_hat, sel.q_hat()))
}

/// Classify a query at time `t` with round budget `delta_t`. Only trace
/// entries strictly before `t` are read.
pub fn classify_at(
    state: &ClassifierState,
    t: usize,
    x: &Point,
    delta_t: f64,
) -> Result<Prediction> {
    let (pi_hat, q_hat) = prior_at(state, t, delta_t)?;
    let eta = state.eta_at(x)?;
    Ok(Prediction {
        label: decide(eta.value, pi_hat),
        pi_hat,
        eta_at_x: eta.value,
        q_hat,
    })
}

/// The single-time entry point: classify against the full recorded trace
/// using the state's own budget rather than a per-round one.
pub fn classify_single(state: &ClassifierState, x: &Point) -> Result<Prediction> {
    classify_at(state, state.f_trace.len(), x, state.delta)
}

/// Per-round confidence budget `pi^2 delta / (6 t^2)`, clamped at one half so
/// every downstream formula keeps a budget inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundBudget {
    pub delta_t: f64,
    pub clamped: bool,
}

pub fn round_budget(delta: f64, t: usize) -> RoundBudget {
    let raw = std::f64::consts::PI.powi(2) * delta / (6.0 * (t * t) as f64);
    RoundBudget {
        delta_t: raw.min(0.5),
        clamped: raw > 0.5,
    }
}

/// Run the policy over `times` (inclusive): one state build, then one
/// prediction per round at the per-round budget. The prediction at time `t`
/// reads the stream only through `X_0..X_{t-1}` plus the query `X_t`.
pub fn sequential_policy(
    pool: &LabeledPool,
    stream: &[Point],
    delta: f64,
    beta_bar: usize,
    space: &MetricSpaceKind,
    times: (usize, usize),
) -> Result<Vec<Prediction>> {
    let (lo, hi) = times;
    if lo < 1 || lo > hi || hi >= stream.len() {
        return Err(Error::TimeOutOfRange {
            t: hi,
            reason: format!(
                "interval [{lo}, {hi}] must sit inside [1, {})",
                stream.len()
            ),
        });
    }
    let state = build_state(pool, stream, delta, beta_bar, space)?;
    let mut out = Vec::with_capacity(hi - lo + 1);
    for t in lo..=hi {
        let budget = round_budget(delta, t);
        out.push(classify_at(&state, t, &stream[t], budget.delta_t)?);
    }
    Ok(out)
}
