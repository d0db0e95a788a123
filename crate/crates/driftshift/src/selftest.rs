//! The release-gate invariant suite.
//!
//! Each check is a standalone function returning `Ok` or a message naming
//! what broke; `run_all` aggregates them into a printable table. The CLI
//! `selftest` subcommand and the acceptance suite both run these.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::label_prob::q_min;
use crate::legendre::{
    extrapolation_weights, gauss_legendre_nodes, gram_eigenvalues, shifted_legendre,
    shifted_legendre_derivative,
};
use crate::sim::regret::{dynamic_regret, tv_label_path, PerTimeRegret};
use crate::sim::scenario::{ClassCond, Scenario, ScenarioSpec, TrajectorySpec};
use crate::sim::oracle::density;
use crate::space::{MetricSpaceKind, Point};

type Check = std::result::Result<(), String>;

/// Orthonormality of the shifted family under 64-node quadrature.
pub fn check_orthonormality() -> Check {
    let nodes = gauss_legendre_nodes(64);
    for j in 0..=6usize {
        for k in 0..=6usize {
            // map [-1, 1] nodes onto [0, 1]
            let integral: f64 = nodes
                .iter()
                .map(|&(x, w)| {
                    let z = 0.5 * (x + 1.0);
                    0.5 * w * shifted_legendre(j, z) * shifted_legendre(k, z)
                })
                .sum();
            let expect = f64::from(j == k);
            if (integral - expect).abs() > 1e-8 {
                return Err(format!(
                    "inner product ({j}, {k}) = {integral}, expected {expect}"
                ));
            }
        }
    }
    Ok(())
}

/// `sup |phi_k| <= sqrt(2k+1)` on a dense grid.
pub fn check_magnitude_bounds() -> Check {
    for k in 0..=6usize {
        let bound = ((2 * k + 1) as f64).sqrt();
        for i in 0..=10_000 {
            let z = i as f64 / 10_000.0;
            let v = shifted_legendre(k, z).abs();
            if v > bound + 1e-9 {
                return Err(format!("|phi_{k}({z})| = {v} exceeds {bound}"));
            }
        }
    }
    Ok(())
}

/// `sup |phi_k'| <= 2 k^2 sqrt(2k+1)` on a dense grid.
pub fn check_derivative_bounds() -> Check {
    for k in 0..=6usize {
        let bound = 2.0 * (k * k) as f64 * ((2 * k + 1) as f64).sqrt();
        for i in 0..=10_000 {
            let z = i as f64 / 10_000.0;
            let v = shifted_legendre_derivative(k, z).abs();
            if v > bound + 1e-9 {
                return Err(format!("|phi_{k}'({z})| = {v} exceeds {bound}"));
            }
        }
    }
    Ok(())
}

/// Every Gram eigenvalue lies within `2 p^2 (p+1) (2p+1)` of `q`.
pub fn check_gram_perturbation() -> Check {
    for p in 0..=3usize {
        let budget = 2.0 * (p * p) as f64 * (p + 1) as f64 * (2 * p + 1) as f64;
        for &q in &[50usize, 200, 1000] {
            for lam in gram_eigenvalues(q, p) {
                if (lam - q as f64).abs() > budget + 1e-6 {
                    return Err(format!(
                        "eigenvalue {lam} at (q={q}, p={p}) strays more than {budget} from q"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// `||v||_2 <= beta sqrt(2/q)` once the window clears the admission floor.
pub fn check_weight_norm() -> Check {
    for beta in 1..=3usize {
        let floor = q_min(beta);
        for &q in &[floor, floor + 7, 2 * floor, 4 * floor] {
            let w = extrapolation_weights(q, beta);
            let bound = beta as f64 * (2.0 / q as f64).sqrt();
            if w.norm2() > bound + 1e-12 {
                return Err(format!(
                    "||v||_2 = {} at (q={q}, beta={beta}) exceeds {bound}",
                    w.norm2()
                ));
            }
        }
    }
    Ok(())
}

/// `|clamp(a_hat/b_hat) - a/b| <= (|a_hat - a| + |b_hat - b|) / |b|` whenever
/// `a/b` lies in the unit interval.
pub fn check_clamped_ratio() -> Check {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for i in 0..100_000 {
        let b: f64 = loop {
            let x = rng.random_range(-3.0..3.0);
            if x != 0.0 {
                break x;
            }
        };
        let u: f64 = rng.random_range(0.0..=1.0);
        let a = u * b;
        let a_hat = a + rng.random_range(-2.0..2.0);
        let b_hat: f64 = loop {
            let x = b + rng.random_range(-2.0..2.0);
            if x != 0.0 {
                break x;
            }
        };
        let lhs = ((a_hat / b_hat).clamp(0.0, 1.0) - u).abs();
        let rhs = ((a_hat - a).abs() + (b_hat - b).abs()) / b.abs();
        if lhs > rhs + 1e-12 {
            return Err(format!(
                "case {i}: clamp gap {lhs} exceeds budget {rhs} (a={a}, b={b})"
            ));
        }
    }
    Ok(())
}

/// The weights reproduce `h(0)` exactly for polynomials of the fitted degree.
pub fn check_polynomial_reproduction() -> Check {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for &(q, beta) in &[
        (2usize, 2usize),
        (10, 2),
        (32, 1),
        (50, 2),
        (64, 3),
        (288, 2),
        (1152, 3),
    ] {
        let w = extrapolation_weights(q, beta);
        let p = w.degree();
        for _ in 0..100 {
            let coeffs: Vec<f64> = (0..=p).map(|_| rng.random_range(-3.0..3.0)).collect();
            let h = |u: f64| {
                coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, &c| acc * u + c)
            };
            let got: f64 = (1..=q).map(|i| w.weight(i) * h(i as f64 / q as f64)).sum();
            if (got - h(0.0)).abs() > 1e-9 {
                return Err(format!(
                    "(q={q}, beta={beta}, p={p}): reproduced {got}, expected {}",
                    h(0.0)
                ));
            }
        }
    }
    Ok(())
}

/// Window two at degree one extrapolates linearly with weights (2, -1).
pub fn check_linear_weights() -> Check {
    let w = extrapolation_weights(2, 2);
    if (w.weight(1) - 2.0).abs() > 1e-12 || (w.weight(2) + 1.0).abs() > 1e-12 {
        return Err(format!("weights ({}, {})", w.weight(1), w.weight(2)));
    }
    Ok(())
}

/// Weight sums reproduce the constant polynomial.
pub fn check_weight_sum() -> Check {
    for &(q, beta) in &[(1usize, 1usize), (5, 1), (32, 1), (40, 2), (300, 3)] {
        let w = extrapolation_weights(q, beta);
        let sum: f64 = w.weights().iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(format!("sum of weights at (q={q}, beta={beta}) is {sum}"));
        }
    }
    Ok(())
}

fn reference_discrete_scenario() -> Scenario {
    let table = vec![
        vec![0.0, 1.0, 2.0, 3.0],
        vec![1.0, 0.0, 1.0, 2.0],
        vec![2.0, 1.0, 0.0, 1.0],
        vec![3.0, 2.0, 1.0, 0.0],
    ];
    Scenario::new(ScenarioSpec {
        space: MetricSpaceKind::discrete(table).expect("valid table"),
        class0: ClassCond::Discrete {
            pmf: vec![0.4, 0.3, 0.2, 0.1],
        },
        class1: ClassCond::Discrete {
            pmf: vec![0.1, 0.2, 0.3, 0.4],
        },
        trajectory: TrajectorySpec::Constant { pi: 0.37 },
        n0: 8,
        n1: 8,
        t_len: 16,
        seed: 5,
    })
    .expect("valid scenario")
}

/// Exact error decomposition through the regression function on alphabets.
pub fn check_error_identity() -> Check {
    let sc = reference_discrete_scenario();
    let pi = sc.pi_at(0).expect("time in range");
    let mut rng = ChaCha12Rng::seed_from_u64(40);
    for case in 0..200 {
        let table: Vec<u8> = (0..4).map(|_| u8::from(rng.random::<f64>() < 0.5)).collect();
        let rule = |x: &Point| match x {
            Point::Symbol(s) => table[*s],
            _ => 0,
        };
        let direct = sc.test_error(0, &rule).map_err(|e| e.to_string())?;
        let mut identity = pi;
        for s in 0..4usize {
            let eta = sc.eta_oracle(&Point::Symbol(s)).map_err(|e| e.to_string())?;
            let mu_bar = 0.5
                * (density(&sc.spec().class0, &Point::Symbol(s)).map_err(|e| e.to_string())?
                    + density(&sc.spec().class1, &Point::Symbol(s)).map_err(|e| e.to_string())?);
            identity += 2.0 * f64::from(table[s]) * (1.0 - pi - eta.value) * mu_bar;
        }
        if (direct - identity).abs() > 1e-12 {
            return Err(format!(
                "case {case}: direct {direct} vs identity {identity}"
            ));
        }
    }
    Ok(())
}

/// The oracle rule never loses to a random rule.
pub fn check_bayes_dominance() -> Check {
    let sc = reference_discrete_scenario();
    let bayes = sc.bayes_error(0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha12Rng::seed_from_u64(41);
    for case in 0..100 {
        let table: Vec<u8> = (0..4).map(|_| u8::from(rng.random::<f64>() < 0.5)).collect();
        let rule = |x: &Point| match x {
            Point::Symbol(s) => table[*s],
            _ => 0,
        };
        let err = sc.test_error(0, &rule).map_err(|e| e.to_string())?;
        if err < bayes - 1e-12 {
            return Err(format!("case {case}: rule error {err} beats oracle {bayes}"));
        }
    }
    Ok(())
}

/// Averaged regret equals a direct left-to-right re-summation.
pub fn check_regret_resummation() -> Check {
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let per_time: Vec<PerTimeRegret> = (10..400)
        .map(|t| {
            let bayes = rng.random_range(0.0..0.4);
            let excess = rng.random_range(0.0..0.3);
            PerTimeRegret::new(t, bayes + excess, bayes).expect("nonnegative excess")
        })
        .collect();
    let got = dynamic_regret(&per_time, (50, 399)).map_err(|e| e.to_string())?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in &per_time {
        if e.t >= 50 {
            sum += e.excess;
            count += 1;
        }
    }
    let direct = sum / count as f64;
    if (got - direct).abs() > 1e-15 {
        return Err(format!("regret {got} vs re-summation {direct}"));
    }
    Ok(())
}

/// The drift metric at exponent one is the plain sum of absolute increments.
pub fn check_variation_metric() -> Check {
    let mut rng = ChaCha12Rng::seed_from_u64(43);
    let path: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..1.0)).collect();
    let got = tv_label_path(&path, 1.0, (0, 199)).map_err(|e| e.to_string())?;
    let direct: f64 = path.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
    if (got - direct).abs() > 1e-12 {
        return Err(format!("metric {got} vs direct sum {direct}"));
    }
    Ok(())
}

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Run the whole suite.
pub fn run_all() -> Vec<CheckOutcome> {
    let checks: Vec<(&'static str, fn() -> Check)> = vec![
        ("orthonormality", check_orthonormality),
        ("magnitude-bounds", check_magnitude_bounds),
        ("derivative-bounds", check_derivative_bounds),
        ("gram-eigenvalue-perturbation", check_gram_perturbation),
        ("extrapolation-weight-norm", check_weight_norm),
        ("clamped-ratio-inequality", check_clamped_ratio),
        ("polynomial-reproduction", check_polynomial_reproduction),
        ("linear-extrapolation-weights", check_linear_weights),
        ("weight-sum-identity", check_weight_sum),
        ("error-decomposition-identity", check_error_identity),
        ("bayes-dominance", check_bayes_dominance),
        ("regret-resummation", check_regret_resummation),
        ("variation-metric", check_variation_metric),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(()) => CheckOutcome {
                name,
                passed: true,
                detail: "ok".into(),
            },
            Err(detail) => CheckOutcome {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}
