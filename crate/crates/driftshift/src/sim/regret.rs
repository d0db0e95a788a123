//! Per-time excess errors and the averaged dynamic regret.

use crate::error::{Error, Result};

/// One round's exact errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerTimeRegret {
    pub t: usize,
    pub test_error: f64,
    pub bayes_error: f64,
    pub excess: f64,
}

impl PerTimeRegret {
    pub fn new(t: usize, test_error: f64, bayes_error: f64) -> Result<Self> {
        let excess = test_error - bayes_error;
        if excess < -1e-12 {
            return Err(Error::InvalidScenario(format!(
                "excess {excess} below the optimum at t = {t}; the reference rule is not optimal"
            )));
        }
        Ok(Self {
            t,
            test_error,
            bayes_error,
            excess,
        })
    }
}

/// Mean excess over an inclusive time interval. Every time in the interval
/// must be present.
pub fn dynamic_regret(per_time: &[PerTimeRegret], interval: (usize, usize)) -> Result<f64> {
    let (lo, hi) = interval;
    if lo > hi {
        return Err(Error::TimeOutOfRange {
            t: lo,
            reason: format!("interval [{lo}, {hi}] is reversed"),
        });
    }
    let mut sum = 0.0;
    let mut seen = 0usize;
    for e in per_time {
        if e.t >= lo && e.t <= hi {
            sum += e.excess;
            seen += 1;
        }
    }
    let want = hi - lo + 1;
    if seen != want {
        return Err(Error::TimeOutOfRange {
            t: lo,
            reason: format!("interval [{lo}, {hi}] needs {want} entries, found {seen}"),
        });
    }
    Ok(sum / want as f64)
}

/// A summary of one policy run over an interval.
#[derive(Debug, Clone)]
pub struct RegretReport {
    pub per_time: Vec<PerTimeRegret>,
    pub interval: (usize, usize),
    pub averaged: f64,
}

impl RegretReport {
    pub fn new(per_time: Vec<PerTimeRegret>, interval: (usize, usize)) -> Result<Self> {
        let averaged = dynamic_regret(&per_time, interval)?;
        Ok(Self {
            per_time,
            interval,
            averaged,
        })
    }
}

/// The drift budget `(sum |pi_l - pi_{l+1}|^{1/beta_v})^{beta_v}` over an
/// inclusive index interval of the path.
pub fn tv_label_path(pis: &[f64], beta_v: f64, interval: (usize, usize)) -> Result<f64> {
    let (lo, hi) = interval;
    if !(beta_v >= 1.0) {
        return Err(Error::InvalidTrajectory(format!(
            "variation exponent must be >= 1, got {beta_v}"
        )));
    }
    if lo > hi || hi >= pis.len() {
        return Err(Error::TimeOutOfRange {
            t: hi,
            reason: format!("interval [{lo}, {hi}] outside the {}-step path", pis.len()),
        });
    }
    let sum: f64 = (lo..hi)
        .map(|l| (pis[l] - pis[l + 1]).abs().powf(1.0 / beta_v))
        .sum();
    Ok(sum.powf(beta_v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(excess: &[f64], start: usize) -> Vec<PerTimeRegret> {
        excess
            .iter()
            .enumerate()
            .map(|(i, &e)| PerTimeRegret::new(start + i, 0.3 + e, 0.3).unwrap())
            .collect()
    }

    #[test]
    fn matching_the_oracle_gives_zero() {
        let per_time = entries(&[0.0; 10], 1);
        assert_eq!(dynamic_regret(&per_time, (1, 10)).unwrap(), 0.0);
    }

    #[test]
    fn mean_matches_direct_resummation() {
        let excess = [0.01, 0.07, 0.002, 0.4, 0.0, 0.11];
        let per_time = entries(&excess, 3);
        let got = dynamic_regret(&per_time, (3, 8)).unwrap();
        let direct = excess.iter().sum::<f64>() / excess.len() as f64;
        assert!((got - direct).abs() < 1e-15);
        // sub-interval
        let got = dynamic_regret(&per_time, (4, 6)).unwrap();
        let direct = (excess[1] + excess[2] + excess[3]) / 3.0;
        assert!((got - direct).abs() < 1e-15);
    }

    #[test]
    fn missing_times_are_rejected() {
        let per_time = entries(&[0.1, 0.2], 5);
        assert!(dynamic_regret(&per_time, (5, 7)).is_err());
        assert!(dynamic_regret(&per_time, (6, 5)).is_err());
    }

    #[test]
    fn negative_excess_is_rejected() {
        assert!(PerTimeRegret::new(1, 0.2, 0.3).is_err());
        assert!(PerTimeRegret::new(1, 0.3, 0.3).is_ok());
    }

    #[test]
    fn constant_wrong_rule_regret() {
        // deterministic scenario: bayes error 0, constant wrong label errs
        // with probability 1 at every step
        let per_time: Vec<PerTimeRegret> = (0..5)
            .map(|t| PerTimeRegret::new(t, 1.0, 0.0).unwrap())
            .collect();
        assert_eq!(dynamic_regret(&per_time, (0, 4)).unwrap(), 1.0);
    }

    #[test]
    fn variation_metric_cases() {
        let constant = vec![0.4; 50];
        assert_eq!(tv_label_path(&constant, 1.0, (0, 49)).unwrap(), 0.0);
        // one jump of 0.3 at beta_v = 1
        let mut jump = vec![0.2; 10];
        jump.extend(vec![0.5; 10]);
        assert!((tv_label_path(&jump, 1.0, (0, 19)).unwrap() - 0.3).abs() < 1e-15);
        // two steps of 0.09 at beta_v = 2: (2 sqrt(0.09))^2 = 0.36
        let path = vec![0.2, 0.29, 0.38];
        assert!((tv_label_path(&path, 2.0, (0, 2)).unwrap() - 0.36).abs() < 1e-12);
        // interval restriction only counts inner increments
        assert!((tv_label_path(&path, 1.0, (1, 2)).unwrap() - 0.09).abs() < 1e-15);
        assert!(tv_label_path(&path, 0.5, (0, 2)).is_err());
        assert!(tv_label_path(&path, 1.0, (0, 3)).is_err());
    }
}
