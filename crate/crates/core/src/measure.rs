use std::collections::HashSet;

use crate::error::{Error, Result};

/// A finite set of labeled points with nonnegative weights.
///
/// Represents the prior `nu`, the marginal `M`, and the generic reference
/// measure `phi` of the chain analyzer. Improper priors appear as
/// unnormalized weights on a truncated grid; exact-zero weights model null
/// sets.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl WeightedMeasure {
    /// Validates and builds a measure: weights nonnegative and finite, at
    /// least one positive, labels unique.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels vs {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidMeasure(format!("duplicate label {l:?}")));
            }
        }
        let mut any_positive = false;
        for (l, &w) in labels.iter().zip(&weights) {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "weight of {l:?} is {w}, must be finite and nonnegative"
                )));
            }
            any_positive |= w > 0.0;
        }
        if !any_positive {
            return Err(Error::InvalidMeasure("all weights are zero".into()));
        }
        Ok(Self { labels, weights })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Total mass of the given index set.
    pub fn mass_of<'a, I: IntoIterator<Item = &'a usize>>(&self, indices: I) -> f64 {
        indices.into_iter().map(|&i| self.weights[i]).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices carrying strictly positive mass.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }
}
