//! Row-selection distributions on the probability simplex.

use crate::error::{Error, Result};

/// Allowed deviation of `Σ pᵢ` from one.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Entries below this count as zero in sparsity reports.
pub const SPARSITY_THRESHOLD: f64 = 1e-5;

/// A point on the probability simplex: nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionVector {
    weights: Vec<f64>,
}

impl DistributionVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "weight {i} is {w}, expected a finite nonnegative value"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Divides nonnegative weights by their sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "cannot normalize weights summing to {total}"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    /// `pᵢ = vᵢ² / Σ vⱼ²`.
    pub fn proportional_to_squares(values: &[f64]) -> Result<Self> {
        Self::normalized(values.iter().map(|v| v * v).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Number of entries below `threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.weights.iter().filter(|&&w| w < threshold).count()
    }
}
