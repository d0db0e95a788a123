//! The transformed density-ratio estimator.
//!
//! For a query point the estimator orders the first-half labelled points by
//! distance, builds a ratio confidence interval on every centred ball, and
//! keeps growing the radius while the running intersection of those intervals
//! stays nonempty. The estimate is the interval midpoint at the largest
//! surviving radius.

use crate::bands::{eta_bounds_with_tables, EtaBounds, IntervalFold, UncertaintyTable};
use crate::data::LabeledPool;
use crate::error::{Error, Result};
use crate::space::{distance, MetricSpaceKind, Point};

/// One distinct radius with the cumulative per-class counts of first-half
/// points inside the closed ball of that radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusStep {
    pub radius: f64,
    pub count0: usize,
    pub count1: usize,
}

/// The ordered distances from a query to the first-half labelled points,
/// with cumulative ball counts at each distinct radius.
#[derive(Debug, Clone)]
pub struct RadiusProfile {
    radii: Vec<f64>,
    steps: Vec<RadiusStep>,
    n0: usize,
    n1: usize,
}

impl RadiusProfile {
    /// Build a profile from pre-accumulated steps; used by tests that
    /// engineer count patterns directly.
    pub fn from_steps(steps: Vec<RadiusStep>, n0: usize, n1: usize) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::EmptyFirstHalf(0));
        }
        let mut prev: Option<&RadiusStep> = None;
        for s in &steps {
            if !s.radius.is_finite() || s.radius < 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "radius {} is not a finite nonnegative value",
                    s.radius
                )));
            }
            if let Some(p) = prev {
                if s.radius <= p.radius || s.count0 < p.count0 || s.count1 < p.count1 {
                    return Err(Error::InvalidScenario(
                        "radius steps must increase with nondecreasing counts".into(),
                    ));
                }
            }
            prev = Some(s);
        }
        let last = steps.last().unwrap();
        if last.count0 != n0 || last.count1 != n1 {
            return Err(Error::InvalidScenario(format!(
                "final counts ({}, {}) must equal the sample sizes ({n0}, {n1})",
                last.count0, last.count1
            )));
        }
        let mut radii = Vec::with_capacity(n0 + n1);
        let mut c0 = 0usize;
        let mut c1 = 0usize;
        for s in &steps {
            for _ in 0..(s.count0 - c0) + (s.count1 - c1) {
                radii.push(s.radius);
            }
            c0 = s.count0;
            c1 = s.count1;
        }
        Ok(Self {
            radii,
            steps,
            n0,
            n1,
        })
    }

    /// The full ascending multiset of distances (duplicates retained).
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Cumulative counts at each distinct radius.
    pub fn steps(&self) -> &[RadiusStep] {
        &self.steps
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
}

fn merge_distance_arrays(d0: &[f64], d1: &[f64]) -> Vec<RadiusStep> {
    let mut steps = Vec::new();
    let (mut a, mut b) = (0usize, 0usize);
    let (mut c0, mut c1) = (0usize, 0usize);
    while a < d0.len() || b < d1.len() {
        let r = match (d0.get(a), d1.get(b)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        // absorb every tied distance from both classes into one step
        while a < d0.len() && d0[a] == r {
            a += 1;
            c0 += 1;
        }
        while b < d1.len() && d1[b] == r {
            b += 1;
            c1 += 1;
        }
        steps.push(RadiusStep {
            radius: r,
            count0: c0,
            count1: c1,
        });
    }
    steps
}

fn profile_from_first_halves(
    x: &Point,
    class0: &[Point],
    class1: &[Point],
    space: &MetricSpaceKind,
) -> Result<RadiusProfile> {
    if class0.is_empty() {
        return Err(Error::EmptyFirstHalf(0));
    }
    if class1.is_empty() {
        return Err(Error::EmptyFirstHalf(1));
    }
    let mut d0 = class0
        .iter()
        .map(|p| distance(x, p, space))
        .collect::<Result<Vec<_>>>()?;
    let mut d1 = class1
        .iter()
        .map(|p| distance(x, p, space))
        .collect::<Result<Vec<_>>>()?;
    d0.sort_by(f64::total_cmp);
    d1.sort_by(f64::total_cmp);
    build_profile_from_sorted(d0, d1)
}

fn build_profile_from_sorted(d0: Vec<f64>, d1: Vec<f64>) -> Result<RadiusProfile> {
    let steps = merge_distance_arrays(&d0, &d1);
    let mut radii = Vec::with_capacity(d0.len() + d1.len());
    let (mut a, mut b) = (0usize, 0usize);
    while a < d0.len() && b < d1.len() {
        if d0[a] <= d1[b] {
            radii.push(d0[a]);
            a += 1;
        } else {
            radii.push(d1[b]);
            b += 1;
        }
    }
    radii.extend_from_slice(&d0[a..]);
    radii.extend_from_slice(&d1[b..]);
    Ok(RadiusProfile {
        radii,
        steps,
        n0: d0.len(),
        n1: d1.len(),
    })
}

/// Distances from `x` to every first-half point of both classes.
pub fn radius_profile(
    x: &Point,
    pool: &LabeledPool,
    space: &MetricSpaceKind,
) -> Result<RadiusProfile> {
    profile_from_first_halves(x, pool.first_half(0), pool.first_half(1), space)
}

fn lepski_scan(
    profile: &RadiusProfile,
    t0: &UncertaintyTable,
    t1: &UncertaintyTable,
) -> (usize, usize, EtaBounds) {
    let steps = profile.steps();
    let mut fold = IntervalFold::new();
    let mut chosen = 0usize;
    let mut chosen_bounds = None;
    let mut inspected = 0usize;
    for (i, s) in steps.iter().enumerate() {
        let eb = eta_bounds_with_tables(s.count0, s.count1, t0, t1);
        inspected += 1;
        fold = fold.meet(&eb.interval);
        if fold.is_empty() {
            // prefix intersections are nested, so no later radius can recover
            break;
        }
        chosen = i;
        chosen_bounds = Some(eb);
    }
    (
        chosen,
        inspected,
        chosen_bounds.expect("smallest radius always qualifies"),
    )
}

/// The largest radius whose prefix of ball intervals still has a common
/// point. The smallest radius qualifies vacuously, so the scan always
/// selects something.
pub fn lepski_radius(profile: &RadiusProfile, delta: f64) -> f64 {
    let t0 = UncertaintyTable::new(profile.n0(), delta).expect("valid (n, delta)");
    let t1 = UncertaintyTable::new(profile.n1(), delta).expect("valid (n, delta)");
    let (chosen, _, _) = lepski_scan(profile, &t0, &t1);
    profile.steps()[chosen].radius
}

/// A point estimate of the transformed density ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaEstimate {
    /// Midpoint of the ratio bounds at the chosen radius, in `[0, 1]`.
    pub value: f64,
    /// The adaptively selected ball radius.
    pub chosen_radius: f64,
    /// Number of distinct radii the scan evaluated.
    pub intervals_inspected: usize,
}

/// Estimate the transformed density ratio at `x` from the first halves of the
/// pool.
pub fn eta_hat(
    x: &Point,
    pool: &LabeledPool,
    space: &MetricSpaceKind,
    delta: f64,
) -> Result<EtaEstimate> {
    EtaEstimator::new(pool, space, delta)?.eta_at(x)
}

/// The induced indicator `1 { 2 eta_hat(x) >= 1 }`; ties go to one.
pub fn f_hat(x: &Point, pool: &LabeledPool, space: &MetricSpaceKind, delta: f64) -> Result<u8> {
    Ok(indicator(eta_hat(x, pool, space, delta)?.value))
}

fn indicator(eta: f64) -> u8 {
    u8::from(2.0 * eta >= 1.0)
}

/// Reusable estimator for repeated queries against one pool. Precomputes the
/// per-count uncertainty tables, and for the real line keeps the first-half
/// samples sorted so each query walks outward in linear time instead of
/// sorting distances from scratch.
#[derive(Debug, Clone)]
pub struct EtaEstimator {
    space: MetricSpaceKind,
    class0: Vec<Point>,
    class1: Vec<Point>,
    sorted0: Option<Vec<f64>>,
    sorted1: Option<Vec<f64>>,
    t0: UncertaintyTable,
    t1: UncertaintyTable,
}

impl EtaEstimator {
    pub fn new(pool: &LabeledPool, space: &MetricSpaceKind, delta: f64) -> Result<Self> {
        if pool.first_half(0).is_empty() {
            return Err(Error::EmptyFirstHalf(0));
        }
        if pool.first_half(1).is_empty() {
            return Err(Error::EmptyFirstHalf(1));
        }
        let t0 = UncertaintyTable::new(pool.n0(), delta)?;
        let t1 = UncertaintyTable::new(pool.n1(), delta)?;
        let (sorted0, sorted1) = if matches!(space, MetricSpaceKind::Euclidean1d) {
            let sort = |pts: &[Point]| -> Result<Vec<f64>> {
                let mut v = pts
                    .iter()
                    .map(|p| match p {
                        Point::Scalar(x) => Ok(*x),
                        other => Err(Error::PointNotInSpace(format!(
                            "{other:?} in a one-dimensional pool"
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                v.sort_by(f64::total_cmp);
                Ok(v)
            };
            (
                Some(sort(pool.first_half(0))?),
                Some(sort(pool.first_half(1))?),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            space: space.clone(),
            class0: pool.first_half(0).to_vec(),
            class1: pool.first_half(1).to_vec(),
            sorted0,
            sorted1,
            t0,
            t1,
        })
    }

    pub fn profile(&self, x: &Point) -> Result<RadiusProfile> {
        if let (Some(s0), Some(s1)) = (&self.sorted0, &self.sorted1) {
            let q = match x {
                Point::Scalar(v) => *v,
                other => {
                    return Err(Error::PointNotInSpace(format!(
                        "{other:?} queried against a one-dimensional pool"
                    )))
                }
            };
            build_profile_from_sorted(outward_distances(s0, q), outward_distances(s1, q))
        } else {
            profile_from_first_halves(x, &self.class0, &self.class1, &self.space)
        }
    }

    pub fn eta_at(&self, x: &Point) -> Result<EtaEstimate> {
        let profile = self.profile(x)?;
        let (chosen, inspected, eb) = lepski_scan(&profile, &self.t0, &self.t1);
        Ok(EtaEstimate {
            value: eb.mid,
            chosen_radius: profile.steps()[chosen].radius,
            intervals_inspected: inspected,
        })
    }

    pub fn f_at(&self, x: &Point) -> Result<u8> {
        Ok(indicator(self.eta_at(x)?.value))
    }
}

/// Sorted distances from `q` to a sorted scalar sample, by walking outward
/// from the insertion point.
fn outward_distances(sorted: &[f64], q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted.len());
    let start = sorted.partition_point(|&p| p < q);
    let mut left = start;
    let mut right = start;
    while left > 0 || right < sorted.len() {
        let dl = if left > 0 {
            q - sorted[left - 1]
        } else {
            f64::INFINITY
        };
        let dr = if right < sorted.len() {
            sorted[right] - q
        } else {
            f64::INFINITY
        };
        if dl <= dr {
            out.push(dl);
            left -= 1;
        } else {
            out.push(dr);
            right += 1;
        }
    }
    out
}
