//! Adaptive binary classification under non-stationary label shift.
//!
//! The labelled data pins down the class-conditional geometry once; the class
//! prior is then re-estimated every round from unlabelled covariates alone.
//! Two adaptive selections do the tuning work, both by the same principle —
//! grow a smoothing parameter while the confidence intervals at all smaller
//! values still share a point:
//!
//! * a ball radius per query, driving the transformed density-ratio estimate
//!   ([`density_ratio`]),
//! * a look-back window per round, driving the label-probability estimate
//!   through polynomial extrapolation weights ([`legendre`], [`label_prob`]).
//!
//! The plug-in classifier thresholds their sum ([`classifier`]), and [`sim`]
//! supplies seeded scenarios with exact Bayes and test-error oracles to
//! measure dynamic regret against.
//!
//! ```rust
//! use driftshift::sim::{presets, Scenario};
//! use driftshift::classifier::{build_state, classify_at, round_budget};
//!
//! let scenario = Scenario::new(presets::stationary(200, 64, 7)).unwrap();
//! let (pool, stream) = scenario.generate().unwrap();
//! let state = build_state(&pool, stream.covariates(), 0.1, 1,
//!                         &scenario.spec().space).unwrap();
//! let t = 60;
//! let budget = round_budget(0.1, t);
//! let p = classify_at(&state, t, &stream.covariates()[t], budget.delta_t).unwrap();
//! assert!(p.label <= 1);
//! assert!((0.0..=1.0).contains(&p.pi_hat));
//! ```

pub mod bands;
pub mod classifier;
pub mod data;
pub mod density_ratio;
pub mod error;
pub mod label_prob;
pub mod legendre;
mod linalg;
pub mod rates;
pub mod rng;
pub mod selftest;
pub mod sim;
pub mod space;

pub use error::{Error, Result};

// Keep the guide's code blocks compiling: every book chapter is attached
// here as a doc-test module, so `cargo test --doc` exercises the snippets.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rates-and-uncertainty.md")]
    mod rates_and_uncertainty {}
    #[doc = include_str!("../../../book/src/density-ratio.md")]
    mod density_ratio {}
    #[doc = include_str!("../../../book/src/polynomial-extrapolation.md")]
    mod polynomial_extrapolation {}
    #[doc = include_str!("../../../book/src/label-probability.md")]
    mod label_probability {}
    #[doc = include_str!("../../../book/src/sequential-classification.md")]
    mod sequential_classification {}
    #[doc = include_str!("../../../book/src/scenarios-and-oracles.md")]
    mod scenarios_and_oracles {}
    #[doc = include_str!("../../../book/src/experiment-cli.md")]
    mod experiment_cli {}
}
