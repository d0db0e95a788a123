//! Truncated-logarithm rate helpers.
//!
//! All deviation widths in this crate are driven by the family
//! `eps_base(n, d) = log_bar(1/d) / n` together with its per-sample
//! (`eps_log`) and iterated-logarithm (`eps_iterlog`) refinements.

use crate::error::{Error, Result};

/// Natural logarithm truncated below at one: `max(1, ln z)`.
///
/// The truncation keeps every rate strictly positive; the function is
/// continuous (`ln e = 1`) and nondecreasing on `(0, ∞)`.
pub fn log_bar(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::NonPositive(z));
    }
    Ok(if z > std::f64::consts::E { z.ln() } else { 1.0 })
}

fn check_rate_args(n: usize, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::SampleSizeZero(n));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    Ok(())
}

/// Base rate `log_bar(1/dtil) / n`.
pub fn eps_base(n: usize, dtil: f64) -> Result<f64> {
    check_rate_args(n, dtil)?;
    Ok(log_bar(1.0 / dtil)? / n as f64)
}

/// Rate with the budget split over the sample: `eps_base(n, delta / n)`.
pub fn eps_log(n: usize, delta: f64) -> Result<f64> {
    check_rate_args(n, delta)?;
    eps_base_unchecked(n, delta / n as f64)
}

/// Rate with the budget split over `log_bar(n)`: `eps_base(n, delta / log_bar(n))`.
pub fn eps_iterlog(n: usize, delta: f64) -> Result<f64> {
    check_rate_args(n, delta)?;
    eps_base_unchecked(n, delta / log_bar(n as f64)?)
}

// `dtil` here can be below the caller's delta but stays positive; skip the
// (0,1) re-check so the refinements accept every delta in (0,1).
fn eps_base_unchecked(n: usize, dtil: f64) -> Result<f64> {
    Ok(log_bar(1.0 / dtil)? / n as f64)
}

/// A validated `(n, delta)` pair for the rate family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    n: usize,
    delta: f64,
}

impl RateParams {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        check_rate_args(n, delta)?;
        Ok(Self { n, delta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> f64 {
        eps_base(self.n, self.delta).expect("validated at construction")
    }

    pub fn log(&self) -> f64 {
        eps_log(self.n, self.delta).expect("validated at construction")
    }

    pub fn iterlog(&self) -> f64 {
        eps_iterlog(self.n, self.delta).expect("validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn log_bar_branches() {
        assert_eq!(log_bar(E.powi(3)).unwrap(), 3.0);
        assert_eq!(log_bar(0.5).unwrap(), 1.0);
        // the (1, e] gap closes at 1 under the max(1, ln z) convention
        assert_eq!(log_bar(2.0).unwrap(), 1.0);
        assert_eq!(log_bar(E).unwrap(), 1.0);
        assert!(log_bar(0.0).is_err());
        assert!(log_bar(-3.0).is_err());
        assert!(log_bar(f64::NAN).is_err());
    }

    #[test]
    fn log_bar_nondecreasing_and_floored() {
        let mut prev = 0.0;
        for i in 1..=10_000 {
            let z = i as f64 * 1e-2;
            let v = log_bar(z).unwrap();
            assert!(v >= 1.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn eps_base_values() {
        assert!((eps_base(100, E.powi(-2)).unwrap() - 0.02).abs() < 1e-15);
        assert!((eps_base(10, 0.5).unwrap() - 0.1).abs() < 1e-15);
        assert!((eps_base(1, E.powi(-4)).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn eps_log_value() {
        // log_bar(200)/100 evaluated with a scalar calculator
        assert!((eps_log(100, 0.5).unwrap() - 0.05298317366548036).abs() < 1e-15);
    }

    #[test]
    fn eps_iterlog_values() {
        // log_bar(n) = 1 for n <= e collapses to the base rate
        assert_eq!(eps_iterlog(2, 0.3).unwrap(), eps_base(2, 0.3).unwrap());
        // frozen from log_bar(log_bar(55)/0.1)/55
        assert!((eps_iterlog(55, 0.1).unwrap() - 0.06710383767246264).abs() < 1e-15);
    }

    #[test]
    fn rate_orderings() {
        for &n in &[1usize, 2, 5, 17, 100, 5000] {
            for &d in &[1e-6, 0.01, 0.3, 0.9, 0.999] {
                let b = eps_base(n, d).unwrap();
                assert!(b > 0.0);
                assert!(eps_iterlog(n, d).unwrap() >= b);
                assert!(eps_log(n, d).unwrap() >= b);
            }
        }
        // nonincreasing in n and in delta
        for &d in &[0.05, 0.5] {
            assert!(eps_base(10, d).unwrap() >= eps_base(100, d).unwrap());
            assert!(eps_base(100, d).unwrap() >= eps_base(1000, d).unwrap());
        }
        assert!(eps_base(50, 0.01).unwrap() >= eps_base(50, 0.1).unwrap());
    }

    #[test]
    fn rate_params_validation() {
        assert!(RateParams::new(0, 0.5).is_err());
        assert!(RateParams::new(10, 0.0).is_err());
        assert!(RateParams::new(10, 1.0).is_err());
        let rp = RateParams::new(10, 0.5).unwrap();
        assert_eq!(rp.base(), eps_base(10, 0.5).unwrap());
        assert_eq!(rp.log(), eps_log(10, 0.5).unwrap());
        assert_eq!(rp.iterlog(), eps_iterlog(10, 0.5).unwrap());
    }
}
