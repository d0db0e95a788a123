//! Points and the metric-space kinds the estimators run over.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A covariate: a real scalar, a real vector, or a symbol of a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Scalar(f64),
    Vector(Vec<f64>),
    Symbol(usize),
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point::Scalar(x)
    }

    /// True when every coordinate is finite (symbols are always finite).
    pub fn is_finite(&self) -> bool {
        match self {
            Point::Scalar(x) => x.is_finite(),
            Point::Vector(v) => v.iter().all(|x| x.is_finite()),
            Point::Symbol(_) => true,
        }
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Scalar(x)
    }
}

/// The supported metric spaces: the real line, `R^d`, and finite alphabets
/// with an explicit distance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSpaceKind {
    Euclidean1d,
    EuclideanNd { dim: usize },
    Discrete { distances: Vec<Vec<f64>> },
}

impl MetricSpaceKind {
    /// Build a discrete space, checking the metric axioms on the table:
    /// symmetry, nonnegativity, and zero exactly on the diagonal.
    pub fn discrete(distances: Vec<Vec<f64>>) -> Result<Self> {
        let k = distances.len();
        if k == 0 {
            return Err(Error::InvalidDistanceTable("empty alphabet".into()));
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidDistanceTable(format!(
                    "row {i} has length {} in a {k}-symbol table",
                    row.len()
                )));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidDistanceTable(format!(
                        "d({i},{j}) = {d} is not a finite nonnegative value"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidDistanceTable(format!(
                        "d({i},{i}) = {d} must be zero"
                    )));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidDistanceTable(format!(
                        "d({i},{j}) = 0 for distinct symbols"
                    )));
                }
                if (d - distances[j][i]).abs() != 0.0 {
                    return Err(Error::InvalidDistanceTable(format!(
                        "d({i},{j}) != d({j},{i})"
                    )));
                }
            }
        }
        Ok(MetricSpaceKind::Discrete { distances })
    }

    /// Number of symbols, for discrete spaces.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            MetricSpaceKind::Discrete { distances } => Some(distances.len()),
            _ => None,
        }
    }
}

/// Distance between two points of the given space.
pub fn distance(a: &Point, b: &Point, space: &MetricSpaceKind) -> Result<f64> {
    match (space, a, b) {
        (MetricSpaceKind::Euclidean1d, Point::Scalar(x), Point::Scalar(y)) => Ok((x - y).abs()),
        (MetricSpaceKind::EuclideanNd { dim }, Point::Vector(x), Point::Vector(y)) => {
            if x.len() != *dim {
                return Err(Error::DimensionMismatch {
                    expected: *dim,
                    got: x.len(),
                });
            }
            if y.len() != *dim {
                return Err(Error::DimensionMismatch {
                    expected: *dim,
                    got: y.len(),
                });
            }
            Ok(x.iter()
                .zip(y)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt())
        }
        (MetricSpaceKind::Discrete { distances }, Point::Symbol(i), Point::Symbol(j)) => {
            let k = distances.len();
            if *i >= k || *j >= k {
                return Err(Error::PointNotInSpace(format!(
                    "symbol index {} outside alphabet of size {k}",
                    i.max(j)
                )));
            }
            Ok(distances[*i][*j])
        }
        _ => Err(Error::PointNotInSpace(format!(
            "point {a:?} incompatible with space {space:?}"
        ))),
    }
}
