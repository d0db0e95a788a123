//! Property tests for the invariants the estimators rely on.

use driftshift::bands::{
    empirical_uncertainty, empirical_uncertainty_flat, eta_bounds, population_uncertainty,
    BallCounts, Interval,
};
use driftshift::data::LabeledPool;
use driftshift::density_ratio::eta_hat;
use driftshift::label_prob::{marginal_estimate, prior_estimate, FunctionalTrace};
use driftshift::rates::{eps_base, eps_iterlog, eps_log, log_bar};
use driftshift::sim::tv_label_path;
use driftshift::space::{MetricSpaceKind, Point};
use proptest::prelude::*;

fn pool_from(h0: Vec<f64>, h1: Vec<f64>) -> LabeledPool {
    let mut c0: Vec<Point> = h0.iter().map(|&x| Point::scalar(x)).collect();
    c0.extend(c0.clone());
    let mut c1: Vec<Point> = h1.iter().map(|&x| Point::scalar(x)).collect();
    c1.extend(c1.clone());
    LabeledPool::new(c0, c1).unwrap()
}

proptest! {
    #[test]
    fn log_bar_is_floored_and_monotone(a in 1e-12f64..1e12, b in 1e-12f64..1e12) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (la, lb) = (log_bar(lo).unwrap(), log_bar(hi).unwrap());
        prop_assert!(la >= 1.0);
        prop_assert!(la <= lb);
    }

    #[test]
    fn rate_family_orderings(n in 1usize..100_000, delta in 1e-9f64..0.999_999) {
        let base = eps_base(n, delta).unwrap();
        prop_assert!(base > 0.0);
        prop_assert!(eps_log(n, delta).unwrap() >= base);
        prop_assert!(eps_iterlog(n, delta).unwrap() >= base);
    }

    #[test]
    fn uncertainty_widths_are_nonnegative(q in 0.0f64..=1.0, eps in 1e-12f64..10.0) {
        prop_assert!(empirical_uncertainty_flat(q, eps) >= 0.0);
    }

    #[test]
    fn uncertainty_respects_the_floor(
        q in 0.0f64..=1.0,
        n in 1usize..10_000,
        delta in 1e-6f64..0.999,
    ) {
        prop_assert!(empirical_uncertainty(q, n, delta) >= 1.0 / n as f64);
        prop_assert!(population_uncertainty(q, n, delta) >= 1.0 / n as f64);
    }

    #[test]
    fn ratio_bounds_are_ordered_and_covered(
        n0 in 1usize..60,
        n1 in 1usize..60,
        c0 in 0usize..60,
        c1 in 0usize..60,
        delta in 0.01f64..0.99,
    ) {
        let counts = BallCounts::new(c0.min(n0), c1.min(n1), n0, n1).unwrap();
        let eb = eta_bounds(&counts, delta);
        prop_assert!(0.0 <= eb.eta_lo && eb.eta_lo <= eb.eta_hi && eb.eta_hi <= 1.0);
        prop_assert!(eb.interval.lo() <= eb.eta_lo);
        prop_assert!(eb.interval.hi() >= eb.eta_hi);
        prop_assert!((eb.mid - 0.5 * (eb.eta_lo + eb.eta_hi)).abs() < 1e-15);
    }

    #[test]
    fn intersection_is_idempotent_and_shrinking(
        lo_a in -10.0f64..10.0, w_a in 0.0f64..5.0,
        lo_b in -10.0f64..10.0, w_b in 0.0f64..5.0,
    ) {
        let a = Interval::new(lo_a, lo_a + w_a).unwrap();
        let b = Interval::new(lo_b, lo_b + w_b).unwrap();
        prop_assert_eq!(a.intersect(&a), Some(a));
        if let Some(c) = a.intersect(&b) {
            prop_assert!(c.lo() >= a.lo() && c.hi() <= a.hi());
            prop_assert!(c.lo() >= b.lo() && c.hi() <= b.hi());
            prop_assert_eq!(a.intersect(&b), b.intersect(&a));
        }
    }

    #[test]
    fn eta_hat_bounded_and_antisymmetric(
        h0 in prop::collection::vec(-3.0f64..3.0, 1..12),
        h1 in prop::collection::vec(-3.0f64..3.0, 1..12),
        x in -4.0f64..4.0,
        delta in 0.05f64..0.5,
    ) {
        let pool = pool_from(h0, h1);
        let space = MetricSpaceKind::Euclidean1d;
        let q = Point::scalar(x);
        let a = eta_hat(&q, &pool, &space, delta).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.value));
        let b = eta_hat(&q, &pool.swapped(), &space, delta).unwrap();
        prop_assert!((a.value - (1.0 - b.value)).abs() < 1e-12);
    }

    #[test]
    fn prior_estimate_stays_in_unit_interval(
        mu in -2.0f64..3.0,
        m0 in 0.0f64..1.0,
        m1 in 0.0f64..1.0,
    ) {
        let e = prior_estimate(mu, m0, m1);
        prop_assert!((0.0..=1.0).contains(&e.pi_hat));
        if m0 == m1 {
            prop_assert!(e.degenerate && e.pi_hat == 0.5);
        }
    }

    #[test]
    fn marginal_estimate_is_linear_in_the_trace(
        raw_a in prop::collection::vec(0.0f64..1.0, 40..80),
        raw_b in prop::collection::vec(0.0f64..1.0, 40..80),
        lambda in 0.0f64..1.0,
        q in 1usize..40,
    ) {
        let len = raw_a.len().min(raw_b.len());
        let a = &raw_a[..len];
        let b = &raw_b[..len];
        let blend: Vec<f64> = a.iter().zip(b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let ta = FunctionalTrace::from_values(a.to_vec()).unwrap();
        let tb = FunctionalTrace::from_values(b.to_vec()).unwrap();
        let tc = FunctionalTrace::from_values(blend).unwrap();
        for beta in [1usize, 2] {
            let ma = marginal_estimate(&ta, len, q, beta).unwrap();
            let mb = marginal_estimate(&tb, len, q, beta).unwrap();
            let mc = marginal_estimate(&tc, len, q, beta).unwrap();
            prop_assert!((mc - (lambda * ma + (1.0 - lambda) * mb)).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_exponent_variation_is_the_plain_sum(
        path in prop::collection::vec(0.0f64..1.0, 2..50),
    ) {
        let hi = path.len() - 1;
        let metric = tv_label_path(&path, 1.0, (0, hi)).unwrap();
        let direct: f64 = path.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
        prop_assert!((metric - direct).abs() < 1e-12);
    }
}
