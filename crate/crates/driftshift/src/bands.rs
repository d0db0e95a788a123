//! Bernstein-flavoured uncertainty widths and the confidence-interval
//! arithmetic over metric balls.
//!
//! `empirical_uncertainty` widths are centred at an observed proportion and
//! `population_uncertainty` widths at a true one; the two are paired so that
//! membership in the population interval forces membership in the empirical
//! one. The ratio bounds [`eta_bounds`] combine per-class widths into a
//! confidence interval for the ball-averaged regression function, which the
//! Lepski radius scan intersects.

use crate::error::{Error, Result};

/// A closed interval with `lo <= hi`. Emptiness is never encoded as
/// `lo > hi`; intersections report it through an explicit `None` /
/// [`IntervalFold::Empty`] instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `[max lo, min hi]`, or `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }
}

/// Running intersection of a family of intervals. The empty family meets to
/// the universal interval, kept as a distinct flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalFold {
    Universal,
    NonEmpty(Interval),
    Empty,
}

impl IntervalFold {
    pub fn new() -> Self {
        IntervalFold::Universal
    }

    /// Intersect one more interval into the fold.
    pub fn meet(self, iv: &Interval) -> Self {
        match self {
            IntervalFold::Universal => IntervalFold::NonEmpty(*iv),
            IntervalFold::NonEmpty(acc) => match acc.intersect(iv) {
                Some(next) => IntervalFold::NonEmpty(next),
                None => IntervalFold::Empty,
            },
            IntervalFold::Empty => IntervalFold::Empty,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, IntervalFold::Empty)
    }
}

impl Default for IntervalFold {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-class counts of labelled points inside one ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallCounts {
    pub count0: usize,
    pub count1: usize,
    pub n0: usize,
    pub n1: usize,
}

impl BallCounts {
    pub fn new(count0: usize, count1: usize, n0: usize, n1: usize) -> Result<Self> {
        if n0 == 0 {
            return Err(Error::SampleSizeZero(n0));
        }
        if n1 == 0 {
            return Err(Error::SampleSizeZero(n1));
        }
        if count0 > n0 || count1 > n1 {
            return Err(Error::InvalidScenario(format!(
                "ball counts ({count0}, {count1}) exceed sample sizes ({n0}, {n1})"
            )));
        }
        Ok(Self {
            count0,
            count1,
            n0,
            n1,
        })
    }

    pub fn proportion(&self, y: u8) -> f64 {
        if y == 0 {
            self.count0 as f64 / self.n0 as f64
        } else {
            self.count1 as f64 / self.n1 as f64
        }
    }
}

/// Bernoulli variance `q (1 - q)`.
pub fn sigma_sq(q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    q * (1.0 - q)
}

/// Deviation width centred at an empirical proportion `q`, at raw rate `eps`.
pub fn empirical_uncertainty_flat(q: f64, eps: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q));
    debug_assert!(eps > 0.0);
    8.0 * ((eps * sigma_sq(q) + eps * eps).sqrt() + (1.0 - 2.0 * q) * eps)
        / (3.0 * (1.0 + 2.0 * eps))
}

/// Deviation width centred at a population proportion `p`, at raw rate `eps`.
pub fn population_uncertainty_flat(p: f64, eps: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    debug_assert!(eps > 0.0);
    8.0 * ((9.0 * eps * sigma_sq(p) + eps * eps).sqrt() + (1.0 - 2.0 * p) * eps)
        / (9.0 + 2.0 * eps)
}

/// Empirical width at the iterated-log rate, floored at `1/n`.
pub fn empirical_uncertainty(q: f64, n: usize, delta: f64) -> f64 {
    let eps = crate::rates::eps_iterlog(n, delta).expect("valid (n, delta)");
    empirical_uncertainty_flat(q, eps).max(1.0 / n as f64)
}

/// Population width at the iterated-log rate, floored at `1/n`.
pub fn population_uncertainty(p: f64, n: usize, delta: f64) -> f64 {
    let eps = crate::rates::eps_iterlog(n, delta).expect("valid (n, delta)");
    population_uncertainty_flat(p, eps).max(1.0 / n as f64)
}

/// Confidence interval around a population proportion `p`, sized so the
/// empirical proportion lands inside with high probability.
pub fn population_ci(p: f64, n: usize, delta: f64) -> Interval {
    Interval {
        lo: p - population_uncertainty(1.0 - p, n, delta),
        hi: p + population_uncertainty(p, n, delta),
    }
}

/// Confidence interval around an empirical proportion `q` for the population
/// value.
pub fn empirical_ci(q: f64, n: usize, delta: f64) -> Interval {
    Interval {
        lo: q - empirical_uncertainty(1.0 - q, n, delta),
        hi: q + empirical_uncertainty(q, n, delta),
    }
}

/// One-sided class-conditional bound on a ball. Deliberately unclamped: only
/// the ratio step clamps, so a lower bound can be negative and an upper bound
/// can exceed one.
pub fn class_cond_bounds(counts: &BallCounts, y: u8, sign: i8, delta: f64) -> f64 {
    let n = if y == 0 { counts.n0 } else { counts.n1 };
    let p_hat = counts.proportion(y);
    if sign < 0 {
        p_hat - empirical_uncertainty(1.0 - p_hat, n, delta)
    } else {
        p_hat + empirical_uncertainty(p_hat, n, delta)
    }
}

/// The lower/upper ratio bounds on a ball together with their midpoint,
/// width, and the doubled interval used by the radius scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaBounds {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub mid: f64,
    pub width: f64,
    pub interval: Interval,
}

/// Tables of empirical widths for every achievable count, so the radius scan
/// evaluates bounds without recomputing rates. `plus[k]` is the upward width
/// at proportion `k/n` and `minus[k]` the downward one.
#[derive(Debug, Clone)]
pub struct UncertaintyTable {
    n: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl UncertaintyTable {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        let eps = crate::rates::eps_iterlog(n, delta)?;
        let floor = 1.0 / n as f64;
        let mut plus = Vec::with_capacity(n + 1);
        let mut minus = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let q = k as f64 / n as f64;
            plus.push(empirical_uncertainty_flat(q, eps).max(floor));
            minus.push(empirical_uncertainty_flat(1.0 - q, eps).max(floor));
        }
        Ok(Self { n, plus, minus })
    }

    fn bound(&self, count: usize, sign: i8) -> f64 {
        let p_hat = count as f64 / self.n as f64;
        if sign < 0 {
            p_hat - self.minus[count]
        } else {
            p_hat + self.plus[count]
        }
    }
}

fn eta_side(num: f64, den_other: f64, sign: i8) -> f64 {
    let den = den_other + num;
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        (sign as f64 + 1.0) / 2.0
    }
}

fn eta_bounds_from(b0_minus: f64, b0_plus: f64, b1_minus: f64, b1_plus: f64) -> EtaBounds {
    // sign s pairs the class-1 bound at s with the class-0 bound at -s
    let eta_lo = eta_side(b1_minus, b0_plus, -1);
    let eta_hi = eta_side(b1_plus, b0_minus, 1);
    let mid = 0.5 * (eta_lo + eta_hi);
    let width = eta_hi - eta_lo;
    EtaBounds {
        eta_lo,
        eta_hi,
        mid,
        width,
        // twice the raw band on each side of the midpoint
        interval: Interval {
            lo: mid - width,
            hi: mid + width,
        },
    }
}

/// Ratio bounds for one ball from its per-class counts.
pub fn eta_bounds(counts: &BallCounts, delta: f64) -> EtaBounds {
    eta_bounds_from(
        class_cond_bounds(counts, 0, -1, delta),
        class_cond_bounds(counts, 0, 1, delta),
        class_cond_bounds(counts, 1, -1, delta),
        class_cond_bounds(counts, 1, 1, delta),
    )
}

/// Same as [`eta_bounds`] but reading the widths from precomputed tables.
pub fn eta_bounds_with_tables(
    count0: usize,
    count1: usize,
    t0: &UncertaintyTable,
    t1: &UncertaintyTable,
) -> EtaBounds {
    eta_bounds_from(
        t0.bound(count0, -1),
        t0.bound(count0, 1),
        t1.bound(count1, -1),
        t1.bound(count1, 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::eps_iterlog;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn sigma_sq_values() {
        assert_eq!(sigma_sq(0.0), 0.0);
        assert_eq!(sigma_sq(0.5), 0.25);
        assert!((sigma_sq(0.9) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn empirical_flat_values() {
        // q = 0: sigma^2 vanishes, the root collapses to eps
        assert!((empirical_uncertainty_flat(0.0, 0.5) - 4.0 / 3.0).abs() < 1e-15);
        // q = 1: sqrt(eps^2) cancels against (1 - 2q) eps
        assert_eq!(empirical_uncertainty_flat(1.0, 0.01), 0.0);
        // q = 1/2: width vanishes with eps
        assert!(empirical_uncertainty_flat(0.5, 1e-12) < 1e-5);
    }

    #[test]
    fn population_flat_values() {
        assert!((population_uncertainty_flat(0.0, 0.9) - 4.0 / 3.0).abs() < 1e-15);
        for &eps in &[0.037, 0.4, 2.0] {
            assert!(population_uncertainty_flat(1.0, eps).abs() < 1e-15);
        }
        assert!(population_uncertainty_flat(0.5, 1e-12) < 1e-5);
    }

    #[test]
    fn uncertainty_floor_and_monotonicity() {
        // small flat part is floored at 1/n
        let u = empirical_uncertainty(0.5, 10, 0.9999);
        assert!(u >= 0.1);
        // a proportion at 1 has zero flat width, so the floor is active
        assert_eq!(empirical_uncertainty(1.0, 10, 0.05), 0.1);
        // nonincreasing along a sample-size grid
        let grid = [10usize, 100, 1000];
        for pair in grid.windows(2) {
            assert!(
                empirical_uncertainty(0.3, pair[0], 0.05)
                    >= empirical_uncertainty(0.3, pair[1], 0.05)
            );
            assert!(
                population_uncertainty(0.3, pair[0], 0.05)
                    >= population_uncertainty(0.3, pair[1], 0.05)
            );
        }
    }

    #[test]
    fn empirical_uncertainty_closed_form_at_zero() {
        let (n, delta) = (200usize, 0.05);
        let eps = eps_iterlog(n, delta).unwrap();
        let direct = 16.0 * eps / (3.0 * (1.0 + 2.0 * eps));
        assert!(direct > 1.0 / n as f64);
        assert!((empirical_uncertainty(0.0, n, delta) - direct).abs() < 1e-15);
    }

    #[test]
    fn class_cond_bound_edges() {
        let d = 0.1;
        let zero = BallCounts::new(0, 0, 8, 8).unwrap();
        assert!(class_cond_bounds(&zero, 0, -1, d) <= 0.0);
        let full = BallCounts::new(8, 8, 8, 8).unwrap();
        let hi = class_cond_bounds(&full, 0, 1, d);
        assert!((hi - (1.0 + empirical_uncertainty(1.0, 8, d))).abs() < 1e-15);
        // n = 4, two hits: p_hat = 0.5 plus/minus the direct formula value
        let half = BallCounts::new(2, 2, 4, 4).unwrap();
        let u = empirical_uncertainty(0.5, 4, d);
        assert!((class_cond_bounds(&half, 1, 1, d) - (0.5 + u)).abs() < 1e-15);
        assert!((class_cond_bounds(&half, 1, -1, d) - (0.5 - u)).abs() < 1e-15);
    }

    #[test]
    fn eta_bounds_symmetric_counts_centre_on_half() {
        for &(c, n) in &[(0usize, 5usize), (2, 5), (5, 5), (7, 20)] {
            let counts = BallCounts::new(c, c, n, n).unwrap();
            let eb = eta_bounds(&counts, 0.2);
            assert!((eb.mid - 0.5).abs() < 1e-12);
            assert!(eb.interval.contains(0.5));
        }
    }

    #[test]
    fn eta_bounds_degenerate_denominator() {
        // one point per class, class 1 empty in the ball: the upper side
        // degenerates for no count combination here, so force it with a
        // direct call where both bounds are negative.
        let eb = eta_bounds_from(-0.5, -0.2, -0.4, -0.1);
        assert_eq!(eb.eta_hi, 1.0); // (s + 1)/2 at s = +1
        assert_eq!(eb.eta_lo, 0.0); // clamped ratio of negatives
    }

    #[test]
    fn eta_bounds_hand_chained_single_point_classes() {
        // counts (1 of 1, 0 of 1), delta = 0.2; widths computed through the
        // same public pieces the implementation composes
        let counts = BallCounts::new(1, 0, 1, 1).unwrap();
        let d = 0.2;
        let b0m = 1.0 - empirical_uncertainty(0.0, 1, d);
        let b0p = 1.0 + empirical_uncertainty(1.0, 1, d);
        let b1m = 0.0 - empirical_uncertainty(1.0, 1, d);
        let b1p = 0.0 + empirical_uncertainty(0.0, 1, d);
        let lo = (b1m / (b0p + b1m)).clamp(0.0, 1.0);
        let hi = (b1p / (b0m + b1p)).clamp(0.0, 1.0);
        let eb = eta_bounds(&counts, d);
        assert_eq!(eb.eta_lo, lo);
        assert_eq!(eb.eta_hi, hi);
        assert_eq!(eb.eta_lo, 0.0);
        assert_eq!(eb.eta_hi, 1.0);
        assert_eq!(eb.mid, 0.5);
        assert_eq!(eb.width, 1.0);
        assert_eq!(eb.interval.lo(), -0.5);
        assert_eq!(eb.interval.hi(), 1.5);
    }

    #[test]
    fn eta_bounds_ordering_and_interval_cover() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let n0 = rng.random_range(1..30);
            let n1 = rng.random_range(1..30);
            let counts = BallCounts::new(
                rng.random_range(0..=n0),
                rng.random_range(0..=n1),
                n0,
                n1,
            )
            .unwrap();
            let d = rng.random_range(0.01..0.99);
            let eb = eta_bounds(&counts, d);
            assert!(0.0 <= eb.eta_lo && eb.eta_lo <= eb.eta_hi && eb.eta_hi <= 1.0);
            assert!(eb.interval.lo() <= eb.eta_lo && eb.eta_hi <= eb.interval.hi());
        }
    }

    #[test]
    fn tables_match_direct_evaluation() {
        let (n0, n1, d) = (13usize, 7usize, 0.07);
        let t0 = UncertaintyTable::new(n0, d).unwrap();
        let t1 = UncertaintyTable::new(n1, d).unwrap();
        for c0 in 0..=n0 {
            for c1 in 0..=n1 {
                let counts = BallCounts::new(c0, c1, n0, n1).unwrap();
                assert_eq!(
                    eta_bounds(&counts, d),
                    eta_bounds_with_tables(c0, c1, &t0, &t1)
                );
            }
        }
    }

    #[test]
    fn intersection_cases() {
        let a = Interval::new(0.0, 1.0).unwrap();
        let b = Interval::new(0.5, 2.0).unwrap();
        assert_eq!(a.intersect(&b), Some(Interval::new(0.5, 1.0).unwrap()));
        let c = Interval::new(0.0, 0.4).unwrap();
        let d = Interval::new(0.6, 1.0).unwrap();
        assert_eq!(c.intersect(&d), None);
        assert_eq!(a.intersect(&a), Some(a));
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn fold_distinguishes_universal_from_empty() {
        let fold = IntervalFold::new();
        assert_eq!(fold, IntervalFold::Universal);
        assert!(!fold.is_empty());
        let a = Interval::new(0.0, 0.4).unwrap();
        let b = Interval::new(0.6, 1.0).unwrap();
        let f1 = fold.meet(&a);
        assert_eq!(f1, IntervalFold::NonEmpty(a));
        let f2 = f1.meet(&b);
        assert!(f2.is_empty());
        // empty absorbs
        assert!(f2.meet(&a).is_empty());
    }

    #[test]
    fn population_interval_implies_empirical_interval_direction() {
        // 1e5 random tuples: whenever q - p fits under the population width,
        // it also fits under the empirical width anchored at 1 - q.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        let mut checked = 0usize;
        while checked < 100_000 {
            let p: f64 = rng.random_range(0.0..1.0);
            let q: f64 = rng.random_range(0.0..1.0);
            let n = rng.random_range(1..5000);
            let delta = rng.random_range(0.001..0.999);
            if q - p <= population_uncertainty(p, n, delta) {
                assert!(
                    q - p <= empirical_uncertainty(1.0 - q, n, delta) + 1e-12,
                    "q={q} p={p} n={n} delta={delta}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn ball_counts_validation() {
        assert!(BallCounts::new(5, 0, 4, 4).is_err());
        assert!(BallCounts::new(0, 0, 0, 4).is_err());
        let c = BallCounts::new(1, 3, 4, 4).unwrap();
        assert_eq!(c.proportion(0), 0.25);
        assert_eq!(c.proportion(1), 0.75);
    }
}
