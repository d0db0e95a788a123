//! Theoretical rate expressions evaluated with unit constants, for plotting
//! next to measured regret. These are shape-only references: the analysis
//! only guarantees them up to unspecified constants, and the outputs say so.

use crate::error::{Error, Result};
use crate::rates::{eps_iterlog, eps_log, log_bar};

/// The averaged-power transform: `ln r` at exponent one, otherwise
/// `((1 - q r^(q-1)) / (1 - q))^(1/q)`.
pub fn average_power_transform(r: f64, q: f64) -> f64 {
    debug_assert!(r >= 1.0 && q > 0.0);
    if q == 1.0 {
        r.ln()
    } else {
        ((1.0 - q * r.powf(q - 1.0)) / (1.0 - q)).powf(1.0 / q)
    }
}

/// Inputs for the rate overlays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    /// Smaller labelled class size.
    pub n_min: usize,
    /// Window of informative unlabelled observations.
    pub window: usize,
    pub delta: f64,
    /// Total variation between the class conditionals.
    pub tv: f64,
    /// Spatial smoothness exponent and constant of the regression function.
    pub gamma: f64,
    pub c_gamma: f64,
    /// Temporal smoothness exponent and constant of the label path.
    pub alpha: f64,
    pub c_alpha: f64,
    /// Margin exponent.
    pub kappa: f64,
    /// Interval length, jump count, and the interval's right endpoint.
    pub t_len: f64,
    pub jumps: f64,
    pub t_max: f64,
    /// Optional drift budget for the variation-based overlay.
    pub v_total: Option<f64>,
}

/// The evaluated overlays.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundOverlay {
    /// Labelled-data rate.
    pub labelled_rate: f64,
    /// Unlabelled-data rate at a single test time.
    pub unlabelled_rate: f64,
    /// Averaged-regret envelope under piecewise-smooth drift.
    pub jump_regret_rhs: f64,
    /// Averaged-regret envelope under a drift budget.
    pub tv_regret_rhs: Option<f64>,
    /// Reminder that these are defined only up to unspecified constants.
    pub note: String,
}

fn labelled_rate(p: &TheoryParams) -> Result<f64> {
    let head = eps_log(p.n_min, p.delta)?.sqrt() / p.tv;
    let tail = if p.c_gamma == 0.0 {
        0.0
    } else {
        (p.c_gamma.powf(1.0 / p.gamma) * eps_iterlog(p.n_min, p.delta)?)
            .powf(p.gamma / (2.0 * p.gamma + 1.0))
    };
    Ok(head.max(tail))
}

fn unlabelled_rate(p: &TheoryParams) -> Result<f64> {
    let head = eps_log(p.window, p.delta)?.sqrt() / p.tv;
    if p.alpha == 0.0 {
        return Ok(head.max(p.c_alpha));
    }
    let tail = (p.c_alpha.powf(1.0 / p.alpha) * eps_log(p.window, p.delta)? / (p.tv * p.tv))
        .powf(p.alpha / (2.0 * p.alpha + 1.0));
    Ok(head.max(tail))
}

// The windowed regret envelope at effective length r and drift constant c.
fn window_envelope(p: &TheoryParams, r: f64, c: f64) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::InvalidScenario(format!(
            "effective window length {r} below one"
        )));
    }
    let eps = log_bar(p.t_max / p.delta)? / r;
    let psi = average_power_transform(r, p.kappa / 2.0);
    let head = (psi * eps / (p.tv * p.tv)).sqrt();
    if p.alpha == 0.0 {
        return Ok(c.max((psi * eps).sqrt() / p.tv));
    }
    let tail = (c.powf(1.0 / p.alpha) * eps / (p.tv * p.tv)).powf(p.alpha / (2.0 * p.alpha + 1.0));
    Ok(head.max(tail))
}

/// Evaluate every overlay. Undefined when the class conditionals coincide.
pub fn theory_bounds(p: &TheoryParams) -> Result<BoundOverlay> {
    if !(p.tv > 0.0) {
        return Err(Error::ZeroTotalVariation);
    }
    if !(p.kappa > 0.0) || !(p.gamma > 0.0) || p.alpha < 0.0 {
        return Err(Error::InvalidScenario(
            "exponents must be positive (alpha may be zero)".into(),
        ));
    }
    let labelled = labelled_rate(p)?;
    let unlabelled = unlabelled_rate(p)?;
    let jump_env = window_envelope(p, p.t_len / p.jumps, p.c_alpha)?;
    let jump_regret_rhs = labelled.max(jump_env).powf(p.kappa) + p.delta;
    let tv_regret_rhs = match p.v_total {
        Some(v) => {
            let env = window_envelope(p, p.t_len, v)?;
            Some(labelled.max(env).powf(p.kappa) + p.delta)
        }
        None => None,
    };
    Ok(BoundOverlay {
        labelled_rate: labelled,
        unlabelled_rate: unlabelled,
        jump_regret_rhs,
        tv_regret_rhs,
        note: "shape-only reference: rates up to unspecified constants (set to 1)".into(),
    })
}
