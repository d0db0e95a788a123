//! Estimating the current label probability from the unlabelled stream.
//!
//! A scalar functional of the covariates is traced over time; windowed
//! extrapolation estimates its current marginal mean, an adaptive rule picks
//! the window, and a clamped ratio against the second-half class means turns
//! the mean into a label-probability estimate.

use std::sync::OnceLock;

use crate::data::LabeledPool;
use crate::error::{Error, Result};
use crate::legendre::{p_of_q, variance_term, WeightCache};
use crate::space::Point;

/// Time-ordered values `f(X_l)` of the traced functional, all in `[0, 1]`.
#[derive(Debug, Clone, Default)]
pub struct FunctionalTrace {
    values: Vec<f64>,
}

impl FunctionalTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidScenario(format!(
                "trace value {bad} outside [0, 1]"
            )));
        }
        Ok(Self { values })
    }

    pub fn push(&mut self, value: f64) {
        assert!(
            (0.0..=1.0).contains(&value),
            "trace value {value} outside [0, 1]"
        );
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Smallest window length admitted to the adaptive scan.
pub fn q_min(beta_bar: usize) -> usize {
    assert!(beta_bar >= 1, "degree cap must be at least 1");
    8 * beta_bar * beta_bar * (beta_bar + 1) * (beta_bar + 1)
}

fn global_weights() -> &'static WeightCache {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    CACHE.get_or_init(WeightCache::new)
}

/// Windowed estimate of the current marginal mean: the weighted sum of the
/// last `q` trace values, never touching index `t` itself.
pub fn marginal_estimate(
    trace: &FunctionalTrace,
    t: usize,
    q: usize,
    beta_bar: usize,
) -> Result<f64> {
    if q == 0 || q > t {
        return Err(Error::TimeOutOfRange {
            t,
            reason: format!("window {q} must satisfy 1 <= q <= t"),
        });
    }
    if trace.len() < t {
        return Err(Error::InsufficientHistory {
            needed: t,
            have: trace.len(),
        });
    }
    let w = global_weights().get(q, beta_bar);
    let values = trace.values();
    let mut acc = 0.0;
    for i in 1..=q {
        acc += w.weight(i) * values[t - i];
    }
    Ok(acc)
}

/// Candidate grids for the window scan. `Full` follows the selection rule
/// literally; `Geometric` thins the candidates to doubling lengths and is off
/// by default because it deviates from the written rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowGrid {
    Full,
    Geometric,
}

/// Outcome of the window scan: the selected length plus every candidate's
/// estimate and deviation width.
#[derive(Debug, Clone)]
pub struct WindowSelection {
    q_hat: usize,
    estimates: Vec<(usize, f64)>,
    var_terms: Vec<(usize, f64)>,
}

impl WindowSelection {
    pub fn q_hat(&self) -> usize {
        self.q_hat
    }

    /// The estimate at the selected window.
    pub fn mu_hat(&self) -> f64 {
        self.estimate_at(self.q_hat)
            .expect("selected window is always a candidate")
    }

    pub fn estimate_at(&self, q: usize) -> Option<f64> {
        self.estimates
            .binary_search_by_key(&q, |e| e.0)
            .ok()
            .map(|i| self.estimates[i].1)
    }

    pub fn var_term_at(&self, q: usize) -> Option<f64> {
        self.var_terms
            .binary_search_by_key(&q, |e| e.0)
            .ok()
            .map(|i| self.var_terms[i].1)
    }

    pub fn estimates(&self) -> &[(usize, f64)] {
        &self.estimates
    }

    pub fn var_terms(&self) -> &[(usize, f64)] {
        &self.var_terms
    }
}

/// Adaptive window selection at time `t`: the largest window whose estimate
/// stays within `2 (R_q + R_qb)` of every admissible smaller window's
/// estimate. Below the minimum admissible length the window is pinned to `t`.
pub fn lepski_window(
    trace: &FunctionalTrace,
    t: usize,
    delta: f64,
    beta_bar: usize,
) -> Result<WindowSelection> {
    lepski_window_on_grid(trace, t, delta, beta_bar, WindowGrid::Full)
}

pub fn lepski_window_on_grid(
    trace: &FunctionalTrace,
    t: usize,
    delta: f64,
    beta_bar: usize,
    grid: WindowGrid,
) -> Result<WindowSelection> {
    if t == 0 {
        return Err(Error::TimeOutOfRange {
            t,
            reason: "window selection needs at least one past observation".into(),
        });
    }
    if trace.len() < t {
        return Err(Error::InsufficientHistory {
            needed: t,
            have: trace.len(),
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }

    let qmin = q_min(beta_bar);
    let candidates: Vec<usize> = if t < qmin {
        vec![t]
    } else {
        match grid {
            WindowGrid::Full => (qmin..=t).collect(),
            WindowGrid::Geometric => {
                let mut v = Vec::new();
                let mut q = qmin;
                while q < t {
                    v.push(q);
                    q *= 2;
                }
                v.push(t);
                v
            }
        }
    };

    // At degree zero every weight is 1/q, so estimates come from prefix sums
    // and the norm has the closed form 1/sqrt(q).
    let prefix: Option<Vec<f64>> = if beta_bar == 1 {
        let mut s = Vec::with_capacity(t + 1);
        s.push(0.0);
        let mut acc = 0.0;
        for &v in &trace.values()[..t] {
            acc += v;
            s.push(acc);
        }
        Some(s)
    } else {
        None
    };

    let log_pi2_delta = (std::f64::consts::PI.powi(2) / delta).ln();
    let mut estimates = Vec::with_capacity(candidates.len());
    let mut var_terms = Vec::with_capacity(candidates.len());
    let mut q_hat = candidates[0];
    // The pairwise condition against all smaller candidates is equivalent to
    // the interval [mu - 2R, mu + 2R] meeting every earlier interval, which
    // the running extremes of the earlier endpoints decide in O(1).
    let mut max_lo = f64::NEG_INFINITY;
    let mut min_hi = f64::INFINITY;
    for (idx, &q) in candidates.iter().enumerate() {
        let (mu, r) = match &prefix {
            Some(s) => {
                let mu = (s[t] - s[t - q]) / q as f64;
                let norm2 = (1.0 / q as f64).sqrt();
                let r = norm2 * (2.0 * (log_pi2_delta + 2.0 * (q as f64).ln())).sqrt();
                (mu, r)
            }
            None => {
                let w = global_weights().get(q, beta_bar);
                let values = trace.values();
                let mut acc = 0.0;
                for i in 1..=q {
                    acc += w.weight(i) * values[t - i];
                }
                (acc, variance_term(&w, delta))
            }
        };
        estimates.push((q, mu));
        var_terms.push((q, r));
        let (lo, hi) = (mu - 2.0 * r, mu + 2.0 * r);
        if idx == 0 || (lo <= min_hi && hi >= max_lo) {
            q_hat = q;
        }
        max_lo = max_lo.max(lo);
        min_hi = min_hi.min(hi);
    }

    Ok(WindowSelection {
        q_hat,
        estimates,
        var_terms,
    })
}

/// Degree the window scan fits at length `q`; exposed for reporting.
pub fn window_degree(q: usize, beta_bar: usize) -> usize {
    p_of_q(q, beta_bar)
}

/// Mean of `f` over the second half of the class-`y` sample.
pub fn second_half_mean<F: Fn(&Point) -> f64>(pool: &LabeledPool, y: u8, f: F) -> f64 {
    let half = pool.second_half(y);
    let sum: f64 = half.iter().map(|p| f(p)).sum();
    sum / half.len() as f64
}

/// Plug-in label-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorEstimate {
    pub pi_hat: f64,
    pub mu_hat: f64,
    pub mean_f0: f64,
    pub mean_f1: f64,
    /// Set when the class means coincide exactly and the estimate falls back
    /// to one half.
    pub degenerate: bool,
}

/// Clamp `(mu_hat - mean_f0) / (mean_f1 - mean_f0)` into `[0, 1]`; when the
/// two class means tie exactly the answer is pinned at one half.
pub fn prior_estimate(mu_hat: f64, mean_f0: f64, mean_f1: f64) -> PriorEstimate {
    debug_assert!(mu_hat.is_finite() && mean_f0.is_finite() && mean_f1.is_finite());
    if mean_f0 == mean_f1 {
        return PriorEstimate {
            pi_hat: 0.5,
            mu_hat,
            mean_f0,
            mean_f1,
            degenerate: true,
        };
    }
    let pi_hat = ((mu_hat - mean_f0) / (mean_f1 - mean_f0)).clamp(0.0, 1.0);
    PriorEstimate {
        pi_hat,
        mu_hat,
        mean_f0,
        mean_f1,
        degenerate: false,
    }
}
