//! Labelled pools with an enforced half split, and the unlabelled stream.

use crate::error::{Error, Result};
use crate::space::Point;

/// The two class-conditional samples. Each class holds `2 * n_y` points; the
/// first `n_y` are reserved for the density-ratio estimator and the second
/// `n_y` for the class-conditional means. The accessors enforce the split so
/// no estimator can touch the wrong half by accident.
#[derive(Debug, Clone)]
pub struct LabeledPool {
    class0: Vec<Point>,
    class1: Vec<Point>,
    n0: usize,
    n1: usize,
}

impl LabeledPool {
    /// Both samples must have positive even length.
    pub fn new(class0: Vec<Point>, class1: Vec<Point>) -> Result<Self> {
        for (y, sample) in [(0u8, &class0), (1u8, &class1)] {
            if sample.is_empty() || sample.len() % 2 != 0 {
                return Err(Error::BadSampleLength {
                    class: y,
                    len: sample.len(),
                });
            }
        }
        let n0 = class0.len() / 2;
        let n1 = class1.len() / 2;
        Ok(Self {
            class0,
            class1,
            n0,
            n1,
        })
    }

    pub fn n(&self, y: u8) -> usize {
        if y == 0 {
            self.n0
        } else {
            self.n1
        }
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    fn class(&self, y: u8) -> &[Point] {
        if y == 0 {
            &self.class0
        } else {
            &self.class1
        }
    }

    /// Points reserved for density-ratio estimation.
    pub fn first_half(&self, y: u8) -> &[Point] {
        &self.class(y)[..self.n(y)]
    }

    /// Points reserved for the class-conditional means.
    pub fn second_half(&self, y: u8) -> &[Point] {
        &self.class(y)[self.n(y)..]
    }

    /// Pool with the class roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            class0: self.class1.clone(),
            class1: self.class0.clone(),
            n0: self.n1,
            n1: self.n0,
        }
    }
}

/// Time-ordered unlabelled covariates. The simulator may attach the true
/// labels, but estimators only ever see [`UnlabeledStream::covariates`].
#[derive(Debug, Clone)]
pub struct UnlabeledStream {
    covariates: Vec<Point>,
    true_labels: Option<Vec<u8>>,
}

impl UnlabeledStream {
    pub fn new(covariates: Vec<Point>) -> Self {
        Self {
            covariates,
            true_labels: None,
        }
    }

    pub fn with_labels(covariates: Vec<Point>, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != covariates.len() {
            return Err(Error::InvalidScenario(format!(
                "{} labels for {} covariates",
                labels.len(),
                covariates.len()
            )));
        }
        Ok(Self {
            covariates,
            true_labels: Some(labels),
        })
    }

    /// The estimator-facing view.
    pub fn covariates(&self) -> &[Point] {
        &self.covariates
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }

    /// Ground truth, available on the simulator side only.
    pub fn true_labels(&self) -> Option<&[u8]> {
        self.true_labels.as_deref()
    }
}
