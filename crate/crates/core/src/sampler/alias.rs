//! Walker/Vose alias method: O(K) construction, O(1) draws.

use crate::error::{Error, Result};
use crate::rng::PprRng;

#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    /// Probability of keeping slot `i` once it is chosen.
    threshold: Vec<f64>,
    alias: Vec<u32>,
    total_weight: f64,
}

/// Builds an alias table over `weights`. At least one weight must be
/// strictly positive; negative or non-finite weights are rejected. The table
/// is a deterministic function of the input order.
pub fn build_alias(weights: &[f64]) -> Result<AliasTable> {
    AliasTable::new(weights)
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("alias table needs at least one weight"));
        }
        if weights.len() > u32::MAX as usize {
            return Err(Error::param("alias table too large"));
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::param("alias weights must be finite and nonnegative"));
        }
        let total_weight: f64 = weights.iter().sum();
        if !(total_weight > 0.0) {
            return Err(Error::param("alias weights must not all be zero"));
        }

        let k = weights.len();
        let scale = k as f64 / total_weight;
        let mut scaled: Vec<f64> = weights.iter().map(|&w| w * scale).collect();
        let mut threshold = vec![1.0; k];
        let mut alias: Vec<u32> = (0..k as u32).collect();
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &p) in scaled.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&l), Some(&g)) = (small.last(), large.last()) {
            small.pop();
            threshold[l] = scaled[l];
            alias[l] = g as u32;
            scaled[g] -= 1.0 - scaled[l];
            if scaled[g] < 1.0 {
                large.pop();
                small.push(g);
            }
        }
        // Leftovers differ from 1 only by rounding.
        for i in small.into_iter().chain(large) {
            threshold[i] = 1.0;
            alias[i] = i as u32;
        }
        Ok(Self {
            threshold,
            alias,
            total_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.threshold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threshold.is_empty()
    }

    /// Sum of the input weights, accumulated in input order.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// `(threshold, alias)` for slot `i`.
    pub fn slot(&self, i: usize) -> (f64, usize) {
        (self.threshold[i], self.alias[i] as usize)
    }

    #[inline]
    pub fn sample(&self, rng: &mut PprRng) -> usize {
        let i = rng.index(self.threshold.len());
        if rng.unit() < self.threshold[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }

    /// Exact probability that [`AliasTable::sample`] returns each index,
    /// reconstructed from the table itself.
    pub fn probabilities(&self) -> Vec<f64> {
        let k = self.len() as f64;
        let mut p = vec![0.0; self.len()];
        for (i, (&keep, &alt)) in self.threshold.iter().zip(&self.alias).enumerate() {
            p[i] += keep / k;
            p[alt as usize] += (1.0 - keep) / k;
        }
        p
    }
}
