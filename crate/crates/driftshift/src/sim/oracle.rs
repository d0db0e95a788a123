//! Exact evaluation of test errors, the regression function, and the total
//! variation between the class conditionals.
//!
//! Discrete scenarios are summed exactly. On the line, decision rules are
//! resolved into their acceptance intervals (panel scan plus bisection to
//! machine precision) and the per-class masses come from the mixture CDF, so
//! the quoted accuracy is limited only by boundary detection: any rule whose
//! decision boundary changes sign at most once per scan panel is integrated
//! to well below the 1e-8 target.

use crate::error::{Error, Result};
use crate::sim::scenario::{ClassCond, GaussianComponent, Scenario};
use crate::space::Point;

/// Panels used to bracket decision boundaries before bisection.
const SCAN_PANELS: usize = 8192;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn gaussian_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

fn gaussian_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (sd * SQRT_2))
}

fn mixture_pdf(components: &[GaussianComponent], x: f64) -> f64 {
    components
        .iter()
        .map(|c| c.weight * gaussian_pdf(x, c.mean, c.sd))
        .sum()
}

fn mixture_cdf(components: &[GaussianComponent], x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    components
        .iter()
        .map(|c| c.weight * gaussian_cdf(x, c.mean, c.sd))
        .sum()
}

/// Density (or pmf mass) of a class conditional at a point.
pub fn density(cond: &ClassCond, x: &Point) -> Result<f64> {
    match (cond, x) {
        (ClassCond::GaussianMixture { components }, Point::Scalar(v)) => {
            Ok(mixture_pdf(components, *v))
        }
        (ClassCond::Discrete { pmf }, Point::Symbol(s)) => {
            pmf.get(*s).copied().ok_or(Error::PointNotInSpace(format!(
                "symbol {s} outside alphabet of size {}",
                pmf.len()
            )))
        }
        _ => Err(Error::PointNotInSpace(format!(
            "point {x:?} incompatible with {cond:?}"
        ))),
    }
}

/// Interval carrying the essential support of both mixtures.
fn support(c0: &[GaussianComponent], c1: &[GaussianComponent]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in c0.iter().chain(c1) {
        lo = lo.min(c.mean - 8.5 * c.sd);
        hi = hi.max(c.mean + 8.5 * c.sd);
    }
    (lo, hi)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature to absolute tolerance `tol`, seeded on `panels`
/// initial subintervals so narrow features are not skipped over.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 64;
    let mut total = 0.0;
    let w = (b - a) / panels as f64;
    for i in 0..panels {
        let x0 = a + i as f64 * w;
        let x1 = x0 + w;
        let m = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(m), f(x1));
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += adaptive_simpson(
            &f,
            x0,
            x1,
            f0,
            fm,
            f1,
            whole,
            tol / panels as f64,
            48,
        );
    }
    total
}

/// The transformed density ratio at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOracle {
    pub value: f64,
    /// Both class densities vanished; the value is pinned at one half.
    pub degenerate: bool,
}

impl Scenario {
    /// Exact regression function `g1 / (g0 + g1)`.
    pub fn eta_oracle(&self, x: &Point) -> Result<EtaOracle> {
        let g0 = density(&self.spec().class0, x)?;
        let g1 = density(&self.spec().class1, x)?;
        if g0 == 0.0 && g1 == 0.0 {
            return Ok(EtaOracle {
                value: 0.5,
                degenerate: true,
            });
        }
        Ok(EtaOracle {
            value: g1 / (g0 + g1),
            degenerate: false,
        })
    }

    /// Total variation between the class conditionals: an exact sum on
    /// finite alphabets, adaptive quadrature of `|g1 - g0| / 2` on the line.
    pub fn tv_oracle(&self) -> Result<f64> {
        match (&self.spec().class0, &self.spec().class1) {
            (ClassCond::Discrete { pmf: p0 }, ClassCond::Discrete { pmf: p1 }) => {
                Ok(0.5 * p0.iter().zip(p1).map(|(a, b)| (a - b).abs()).sum::<f64>())
            }
            (
                ClassCond::GaussianMixture { components: c0 },
                ClassCond::GaussianMixture { components: c1 },
            ) => {
                let (lo, hi) = support(c0, c1);
                Ok(0.5
                    * integrate(
                        |x| (mixture_pdf(c1, x) - mixture_pdf(c0, x)).abs(),
                        lo,
                        hi,
                        1e-9,
                    ))
            }
            _ => Err(Error::InvalidScenario(
                "class conditionals of mixed kinds".into(),
            )),
        }
    }

    /// Error of `rule` at time `t`: the class-1 mass it rejects plus the
    /// class-0 mass it accepts, weighted by the label probability.
    pub fn test_error(&self, t: usize, rule: &dyn Fn(&Point) -> u8) -> Result<f64> {
        let pi = self.pi_at(t)?;
        self.test_error_at_pi(pi, rule)
    }

    /// Same, at an explicit label probability.
    pub fn test_error_at_pi(&self, pi: f64, rule: &dyn Fn(&Point) -> u8) -> Result<f64> {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::InvalidScenario(format!("pi = {pi} outside [0, 1]")));
        }
        match (&self.spec().class0, &self.spec().class1) {
            (ClassCond::Discrete { pmf: p0 }, ClassCond::Discrete { pmf: p1 }) => {
                let mut err = 0.0;
                for s in 0..p0.len() {
                    let accept = f64::from(rule(&Point::Symbol(s)));
                    err += pi * (1.0 - accept) * p1[s] + (1.0 - pi) * accept * p0[s];
                }
                Ok(err)
            }
            (
                ClassCond::GaussianMixture { components: c0 },
                ClassCond::GaussianMixture { components: c1 },
            ) => {
                let (lo, hi) = support(c0, c1);
                let scalar_rule = |x: f64| rule(&Point::Scalar(x));
                let intervals = acceptance_intervals(&scalar_rule, lo, hi);
                let mass = |components: &[GaussianComponent]| -> f64 {
                    intervals
                        .iter()
                        .map(|&(a, b)| mixture_cdf(components, b) - mixture_cdf(components, a))
                        .sum()
                };
                let m1 = mass(c1);
                let m0 = mass(c0);
                Ok(pi * (1.0 - m1) + (1.0 - pi) * m0)
            }
            _ => Err(Error::InvalidScenario(
                "class conditionals of mixed kinds".into(),
            )),
        }
    }

    /// The oracle-optimal rule at time `t`: accept where the regression
    /// function clears `1 - pi_t`.
    pub fn bayes_rule(&self, t: usize) -> Result<impl Fn(&Point) -> u8 + '_> {
        let pi = self.pi_at(t)?;
        Ok(move |x: &Point| {
            let eta = self.eta_oracle(x).map(|e| e.value).unwrap_or(0.5);
            u8::from(eta > 1.0 - pi)
        })
    }

    pub fn bayes_error(&self, t: usize) -> Result<f64> {
        let rule = self.bayes_rule(t)?;
        self.test_error(t, &rule)
    }
}

/// Maximal intervals on which `rule` accepts. The scan brackets each switch
/// inside one panel and bisection pins it to machine precision; beyond the
/// scanned range the rule is extended constantly, which is harmless because
/// the range already carries all but ~1e-16 of the mass.
fn acceptance_intervals<F: Fn(f64) -> u8>(rule: &F, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let n = SCAN_PANELS;
    let w = (hi - lo) / n as f64;
    let mut intervals = Vec::new();
    let mut prev_x = lo;
    let mut prev_v = rule(lo);
    let mut open: Option<f64> = if prev_v == 1 {
        Some(f64::NEG_INFINITY)
    } else {
        None
    };
    for i in 1..=n {
        let x = if i == n { hi } else { lo + i as f64 * w };
        let v = rule(x);
        if v != prev_v {
            let boundary = bisect_switch(rule, prev_x, x, prev_v);
            if v == 1 {
                open = Some(boundary);
            } else if let Some(start) = open.take() {
                intervals.push((start, boundary));
            }
        }
        prev_x = x;
        prev_v = v;
    }
    if let Some(start) = open {
        intervals.push((start, f64::INFINITY));
    }
    intervals
}

// Bisect inside (a, b] for the leftmost switch away from `va = rule(a)`.
fn bisect_switch<F: Fn(f64) -> u8>(rule: &F, mut a: f64, mut b: f64, va: u8) -> f64 {
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if rule(m) == va {
            a = m;
        } else {
            b = m;
        }
    }
    b
}
