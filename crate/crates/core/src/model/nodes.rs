use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive node multiplicities `r₁, …, rₙ` and their total `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Multiplicities {
    r: Vec<f64>,
    total: f64,
}

impl Multiplicities {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::invalid("at least one multiplicity is required"));
        }
        if let Some(bad) = r.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid(format!("multiplicities must be positive and finite, got {bad}")));
        }
        let total = r.iter().sum();
        Ok(Self { r, total })
    }

    /// `n` unit multiplicities.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_palindromic(&self) -> bool {
        self.r.iter().eq(self.r.iter().rev())
    }
}

impl TryFrom<Vec<f64>> for Multiplicities {
    type Error = Error;

    fn try_from(r: Vec<f64>) -> Result<Self> {
        Self::new(r)
    }
}

impl From<Multiplicities> for Vec<f64> {
    fn from(m: Multiplicities) -> Self {
        m.r
    }
}

/// A point `y₁ ≤ … ≤ yₙ` of the closed node simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NodeConfig(Vec<f64>);

impl NodeConfig {
    /// Rejects empty, non-finite or unsorted input.
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::invalid("a node configuration needs at least one node"));
        }
        if let Some(bad) = y.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("nodes must be finite, got {bad}")));
        }
        if let Some(index) = y.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::UnsortedNodes {
                index,
                prev: y[index],
                next: y[index + 1],
            });
        }
        Ok(Self(y))
    }

    /// Sorts the input first.
    pub fn from_unsorted(mut y: Vec<f64>) -> Result<Self> {
        y.sort_by(f64::total_cmp);
        Self::new(y)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// `max(|y₁|, |yₙ|)`: the smallest box `[-B, B]ⁿ` containing the configuration.
    pub fn radius(&self) -> f64 {
        self.first().abs().max(self.last().abs())
    }

    /// Weighted mean `Σ rⱼ yⱼ / R`.
    pub fn weighted_center(&self, r: &Multiplicities) -> f64 {
        self.0.iter().zip(r.as_slice()).map(|(y, w)| y * w).sum::<f64>() / r.total()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.0.iter().map(|&y| f(y)).collect())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for NodeConfig {
    type Error = Error;

    fn try_from(y: Vec<f64>) -> Result<Self> {
        Self::new(y)
    }
}

impl From<NodeConfig> for Vec<f64> {
    fn from(y: NodeConfig) -> Self {
        y.0
    }
}
