//! Generative scenarios: class conditionals, label-probability trajectories,
//! and seeded sampling.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{LabeledPool, UnlabeledStream};
use crate::error::{Error, Result};
use crate::rng::SeedSplitter;
use crate::space::{MetricSpaceKind, Point};

const TAG_POOL0: u64 = 0;
const TAG_POOL1: u64 = 1;
const TAG_LABELS: u64 = 2;
const TAG_COVARIATES: u64 = 3;
const TAG_WALK: u64 = 4;

/// One Gaussian mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// A class-conditional distribution: a one-dimensional Gaussian mixture or a
/// pmf over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassCond {
    GaussianMixture { components: Vec<GaussianComponent> },
    Discrete { pmf: Vec<f64> },
}

impl ClassCond {
    pub fn gaussian(mean: f64, sd: f64) -> Self {
        ClassCond::GaussianMixture {
            components: vec![GaussianComponent {
                weight: 1.0,
                mean,
                sd,
            }],
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ClassCond::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidScenario("empty mixture".into()));
                }
                let mut total = 0.0;
                for c in components {
                    if !(c.weight >= 0.0) || !c.mean.is_finite() || !(c.sd > 0.0) {
                        return Err(Error::InvalidScenario(format!(
                            "bad component {c:?}"
                        )));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidScenario(format!(
                        "mixture weights sum to {total}"
                    )));
                }
                Ok(())
            }
            ClassCond::Discrete { pmf } => {
                if pmf.is_empty() {
                    return Err(Error::InvalidPmf("empty pmf".into()));
                }
                let mut total = 0.0;
                for &p in pmf {
                    if !(p >= 0.0) {
                        return Err(Error::InvalidPmf(format!("negative mass {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidPmf(format!("pmf sums to {total}")));
                }
                Ok(())
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            ClassCond::GaussianMixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                let c = &components[chosen];
                let z: f64 = StandardNormal.sample(rng);
                Point::Scalar(c.mean + c.sd * z)
            }
            ClassCond::Discrete { pmf } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = pmf.len() - 1;
                for (i, &p) in pmf.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                Point::Symbol(chosen)
            }
        }
    }
}

/// Named shapes for smoothly drifting trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderShape {
    Sine {
        amplitude: f64,
        cycles: f64,
        offset: f64,
    },
}

impl HolderShape {
    fn eval(&self, u: f64) -> f64 {
        match self {
            HolderShape::Sine {
                amplitude,
                cycles,
                offset,
            } => offset + amplitude * (2.0 * std::f64::consts::PI * cycles * u).sin(),
        }
    }
}

/// A stretch of time with one constant label probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub len: usize,
    pub level: f64,
}

/// How the label probability moves over the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySpec {
    Constant {
        pi: f64,
    },
    /// A shape from a smoothness class with certified exponent and constant.
    Holder {
        beta: f64,
        constant: f64,
        shape: HolderShape,
    },
    /// Piecewise-constant levels; the segments partition the stream.
    PiecewiseJumps {
        segments: Vec<Segment>,
    },
    /// A lazy reflected walk scaled to hit a declared variation budget.
    TvBudget {
        total_variation: f64,
        beta_v: f64,
        path_id: u64,
    },
}

/// Finite-difference certificate that `g` lies in the Hölder class
/// `(beta, c)` on `[0, 1]`, checked on a grid. Supports `beta` in `(0, 2]`.
pub fn certify_holder<F: Fn(f64) -> f64>(g: F, beta: f64, c: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::InvalidTrajectory(format!(
            "certificate supports exponents in (0, 2], got {beta}"
        )));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidTrajectory(format!("negative constant {c}")));
    }
    const GRID: usize = 256;
    let tol = 1e-6;
    let at = |i: usize| i as f64 / GRID as f64;
    if beta <= 1.0 {
        for i in 0..=GRID {
            for j in (i + 1)..=GRID {
                let gap = (g(at(i)) - g(at(j))).abs();
                let budget = c * (at(j) - at(i)).powf(beta) + tol;
                if gap > budget {
                    return Err(Error::InvalidTrajectory(format!(
                        "|g({}) - g({})| = {gap} exceeds C |u-v|^beta = {budget}",
                        at(i),
                        at(j)
                    )));
                }
            }
        }
    } else {
        // first derivative via central differences, then a (beta - 1) check
        let h = 1e-5;
        let dg = |u: f64| {
            let a = (u - h).max(0.0);
            let b = (u + h).min(1.0);
            (g(b) - g(a)) / (b - a)
        };
        for i in 0..=GRID {
            for j in (i + 1)..=GRID {
                let gap = (dg(at(i)) - dg(at(j))).abs();
                let budget = c * (at(j) - at(i)).powf(beta - 1.0) + tol;
                if gap > budget {
                    return Err(Error::InvalidTrajectory(format!(
                        "|g'({}) - g'({})| = {gap} exceeds C |u-v|^(beta-1) = {budget}",
                        at(i),
                        at(j)
                    )));
                }
            }
        }
    }
    Ok(())
}

fn realize_trajectory(traj: &TrajectorySpec, t_len: usize) -> Result<Vec<f64>> {
    if t_len == 0 {
        return Err(Error::InvalidScenario("stream length must be positive".into()));
    }
    let pis = match traj {
        TrajectorySpec::Constant { pi } => {
            if !(0.0..=1.0).contains(pi) {
                return Err(Error::InvalidTrajectory(format!("pi = {pi} outside [0, 1]")));
            }
            vec![*pi; t_len]
        }
        TrajectorySpec::Holder {
            beta,
            constant,
            shape,
        } => {
            certify_holder(|u| shape.eval(u), *beta, *constant)?;
            // index l maps to w((T-1-l)/(T-1)) so the final time sits at w(0)
            let denom = (t_len - 1).max(1) as f64;
            (0..t_len)
                .map(|l| shape.eval((t_len - 1 - l) as f64 / denom))
                .collect()
        }
        TrajectorySpec::PiecewiseJumps { segments } => {
            if segments.is_empty() {
                return Err(Error::InvalidTrajectory("no segments".into()));
            }
            let total: usize = segments.iter().map(|s| s.len).sum();
            if total != t_len {
                return Err(Error::InvalidTrajectory(format!(
                    "segments cover {total} steps, stream has {t_len}"
                )));
            }
            let mut pis = Vec::with_capacity(t_len);
            for s in segments {
                if s.len == 0 {
                    return Err(Error::InvalidTrajectory("empty segment".into()));
                }
                if !(0.0..=1.0).contains(&s.level) {
                    return Err(Error::InvalidTrajectory(format!(
                        "level {} outside [0, 1]",
                        s.level
                    )));
                }
                pis.extend(std::iter::repeat(s.level).take(s.len));
            }
            pis
        }
        TrajectorySpec::TvBudget {
            total_variation,
            beta_v,
            path_id,
        } => realize_tv_walk(*total_variation, *beta_v, *path_id, t_len)?,
    };
    debug_assert_eq!(pis.len(), t_len);
    if let Some(bad) = pis.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidTrajectory(format!(
            "trajectory leaves [0, 1] at value {bad}"
        )));
    }
    Ok(pis)
}

// A lazy +-h walk reflected inside [-1, 1]; the declared budget scales the
// increments linearly, so the realised variation matches it exactly.
fn realize_tv_walk(v: f64, beta_v: f64, path_id: u64, t_len: usize) -> Result<Vec<f64>> {
    if !(beta_v >= 1.0) {
        return Err(Error::InvalidTrajectory(format!(
            "variation exponent must be >= 1, got {beta_v}"
        )));
    }
    if !(v >= 0.0) {
        return Err(Error::InvalidTrajectory(format!("negative budget {v}")));
    }
    if v == 0.0 {
        return Ok(vec![0.5; t_len]);
    }
    if t_len < 2 {
        return Err(Error::InvalidTrajectory(
            "a positive variation budget needs at least two steps".into(),
        ));
    }
    let mut rng = SeedSplitter::new(path_id).stream(TAG_WALK);
    let h = 1.0 / (t_len as f64).sqrt();
    let mut shape = Vec::with_capacity(t_len);
    let mut z = 0.0f64;
    shape.push(z);
    for _ in 1..t_len {
        let u: f64 = rng.random();
        // lazy: stay put half the time
        let step = if u < 0.25 {
            -h
        } else if u < 0.5 {
            h
        } else {
            0.0
        };
        z += step;
        if z > 1.0 {
            z = 2.0 - z;
        } else if z < -1.0 {
            z = -2.0 - z;
        }
        shape.push(z);
    }
    let shape_var = variation_metric(&shape, beta_v);
    if shape_var == 0.0 {
        return Err(Error::InvalidTrajectory(
            "walk degenerated to a constant; pick another path id".into(),
        ));
    }
    let scale = v / shape_var;
    let max_abs = shape.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    if scale * max_abs > 0.4 {
        return Err(Error::InvalidTrajectory(format!(
            "budget {v} pushes the path outside [0.1, 0.9]; maximum supported here is {}",
            0.4 * shape_var / max_abs
        )));
    }
    let pis: Vec<f64> = shape.iter().map(|z| 0.5 + scale * z).collect();
    let realized = variation_metric(&pis, beta_v);
    if (realized - v).abs() > 0.01 * v {
        return Err(Error::InvalidTrajectory(format!(
            "realised variation {realized} misses the declared budget {v}"
        )));
    }
    Ok(pis)
}

fn variation_metric(path: &[f64], beta_v: f64) -> f64 {
    path.windows(2)
        .map(|w| (w[0] - w[1]).abs().powf(1.0 / beta_v))
        .sum::<f64>()
        .powf(beta_v)
}

/// Full generative description: spaces, class conditionals, trajectory, and
/// sizes, all serialisable as part of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub space: MetricSpaceKind,
    pub class0: ClassCond,
    pub class1: ClassCond,
    pub trajectory: TrajectorySpec,
    pub n0: usize,
    pub n1: usize,
    pub t_len: usize,
    pub seed: u64,
}

/// A validated scenario with its realised label-probability path.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    pis: Vec<f64>,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        spec.class0.validate()?;
        spec.class1.validate()?;
        if spec.n0 == 0 || spec.n1 == 0 {
            return Err(Error::InvalidScenario("class sample sizes must be positive".into()));
        }
        match (&spec.space, &spec.class0, &spec.class1) {
            (MetricSpaceKind::Euclidean1d, ClassCond::GaussianMixture { .. }, ClassCond::GaussianMixture { .. }) => {}
            (MetricSpaceKind::Discrete { distances }, ClassCond::Discrete { pmf: p0 }, ClassCond::Discrete { pmf: p1 }) => {
                if p0.len() != distances.len() || p1.len() != distances.len() {
                    return Err(Error::InvalidScenario(format!(
                        "pmf lengths ({}, {}) do not match the {}-symbol alphabet",
                        p0.len(),
                        p1.len(),
                        distances.len()
                    )));
                }
            }
            _ => {
                return Err(Error::InvalidScenario(
                    "class conditionals must both be Gaussian mixtures on the line or pmfs on the declared alphabet".into(),
                ))
            }
        }
        let pis = realize_trajectory(&spec.trajectory, spec.t_len)?;
        Ok(Self { spec, pis })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    /// The realised label-probability path, one value per stream index.
    pub fn pis(&self) -> &[f64] {
        &self.pis
    }

    pub fn pi_at(&self, t: usize) -> Result<f64> {
        self.pis.get(t).copied().ok_or(Error::TimeOutOfRange {
            t,
            reason: format!("stream has {} steps", self.pis.len()),
        })
    }

    /// Draw the labelled pool and the unlabelled stream. Labels live on the
    /// stream's simulator side only.
    pub fn generate(&self) -> Result<(LabeledPool, UnlabeledStream)> {
        let splitter = SeedSplitter::new(self.spec.seed);
        let mut rng0 = splitter.stream(TAG_POOL0);
        let mut rng1 = splitter.stream(TAG_POOL1);
        let class0: Vec<Point> = (0..2 * self.spec.n0)
            .map(|_| self.spec.class0.sample(&mut rng0))
            .collect();
        let class1: Vec<Point> = (0..2 * self.spec.n1)
            .map(|_| self.spec.class1.sample(&mut rng1))
            .collect();
        let pool = LabeledPool::new(class0, class1)?;
        let mut rng_y = splitter.stream(TAG_LABELS);
        let mut rng_x = splitter.stream(TAG_COVARIATES);
        let mut labels = Vec::with_capacity(self.spec.t_len);
        let mut covs = Vec::with_capacity(self.spec.t_len);
        for &pi in &self.pis {
            let y = u8::from(rng_y.random::<f64>() < pi);
            labels.push(y);
            let cond = if y == 1 {
                &self.spec.class1
            } else {
                &self.spec.class0
            };
            covs.push(cond.sample(&mut rng_x));
        }
        Ok((pool, UnlabeledStream::with_labels(covs, labels)?))
    }
}

/// The scenario catalogue: one preset per drift regime.
pub mod presets {
    use super::*;

    fn gaussian_pair() -> (ClassCond, ClassCond) {
        (ClassCond::gaussian(-1.0, 1.0), ClassCond::gaussian(1.0, 1.0))
    }

    /// Constant label probability one half.
    pub fn stationary(n: usize, t_len: usize, seed: u64) -> ScenarioSpec {
        let (class0, class1) = gaussian_pair();
        ScenarioSpec {
            space: MetricSpaceKind::Euclidean1d,
            class0,
            class1,
            trajectory: TrajectorySpec::Constant { pi: 0.5 },
            n0: n,
            n1: n,
            t_len,
            seed,
        }
    }

    /// One slow half-cycle swell with a certified smoothness constant for
    /// the declared exponent (0.5, 1, or 2).
    pub fn slow_sine(beta: f64, n: usize, t_len: usize, seed: u64) -> Result<ScenarioSpec> {
        let amplitude = 0.35;
        let cycles = 0.5f64;
        let omega = 2.0 * std::f64::consts::PI * cycles;
        let constant = if beta == 1.0 {
            amplitude * omega
        } else if beta == 2.0 {
            amplitude * omega * omega
        } else if beta == 0.5 {
            // the 1/2-exponent envelope of a sine peaks at lag 1/(pi cycles)
            2.0 * amplitude * (std::f64::consts::PI * cycles).sqrt()
        } else {
            return Err(Error::InvalidTrajectory(format!(
                "no certified constant for exponent {beta}; use 0.5, 1, or 2"
            )));
        };
        let (class0, class1) = gaussian_pair();
        Ok(ScenarioSpec {
            space: MetricSpaceKind::Euclidean1d,
            class0,
            class1,
            trajectory: TrajectorySpec::Holder {
                beta,
                constant,
                shape: HolderShape::Sine {
                    amplitude,
                    cycles,
                    offset: 0.5,
                },
            },
            n0: n,
            n1: n,
            t_len,
            seed,
        })
    }

    /// Piecewise-constant label probability alternating between 0.2 and 0.8
    /// over `jumps` equal segments.
    pub fn j_jumps(jumps: usize, n: usize, t_len: usize, seed: u64) -> Result<ScenarioSpec> {
        if jumps == 0 || jumps > t_len {
            return Err(Error::InvalidTrajectory(format!(
                "need 1..={t_len} segments, got {jumps}"
            )));
        }
        let base = t_len / jumps;
        let extra = t_len % jumps;
        let segments: Vec<Segment> = (0..jumps)
            .map(|j| Segment {
                len: base + usize::from(j < extra),
                level: if j % 2 == 0 { 0.2 } else { 0.8 },
            })
            .collect();
        let (class0, class1) = gaussian_pair();
        Ok(ScenarioSpec {
            space: MetricSpaceKind::Euclidean1d,
            class0,
            class1,
            trajectory: TrajectorySpec::PiecewiseJumps { segments },
            n0: n,
            n1: n,
            t_len,
            seed,
        })
    }

    /// A bounded-variation lazy walk on `[0.1, 0.9]`.
    pub fn tv_walk(v: f64, beta_v: f64, n: usize, t_len: usize, seed: u64) -> ScenarioSpec {
        let (class0, class1) = gaussian_pair();
        ScenarioSpec {
            space: MetricSpaceKind::Euclidean1d,
            class0,
            class1,
            trajectory: TrajectorySpec::TvBudget {
                total_variation: v,
                beta_v,
                path_id: 0,
            },
            n0: n,
            n1: n,
            t_len,
            seed,
        }
    }
}
