//! Weighted isotonic and antitonic least-squares regression.
//!
//! [`isotonic_regression`] minimises `Σ w_i (g_i − f_i)²` over non-decreasing
//! `f` with the stack form of pool-adjacent-violators: one left-to-right pass,
//! merging the top block with its predecessor while their pooled values are
//! out of order. Equal neighbours are not violators and stay unpooled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values `g_i` with strictly positive weights `w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedVector {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty vector".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value".into()));
        }
        if let Some(i) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "weight at index {i} must be positive and finite, got {}",
                weights[i]
            )));
        }
        Ok(Self { values, weights })
    }

    /// Weights all equal to one.
    pub fn unweighted(values: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; values.len()];
        Self::new(values, w)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn reversed(&self) -> Self {
        Self {
            values: self.values.iter().rev().copied().collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }
}

/// A maximal run of indices `start..=end` sharing one fitted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    pub value: f64,
    pub weight: f64,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSolution {
    pub fitted: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl BlockSolution {
    /// True when the whole vector pooled into a single level set.
    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }
}

pub fn isotonic_regression(v: &WeightedVector) -> BlockSolution {
    // (weighted sum, total weight, start index) per block.
    let mut stack: Vec<(f64, f64, usize)> = Vec::with_capacity(v.len());
    for (i, (&g, &w)) in v.values.iter().zip(&v.weights).enumerate() {
        let mut cur = (w * g, w, i);
        while let Some(&(sum, weight, start)) = stack.last() {
            // sum/weight > cur.0/cur.1, cross-multiplied to avoid two divisions.
            if sum * cur.1 > cur.0 * weight {
                stack.pop();
                cur = (sum + cur.0, weight + cur.1, start);
            } else {
                break;
            }
        }
        stack.push(cur);
    }

    let n = v.len();
    let mut fitted = vec![0.0; n];
    let mut blocks = Vec::with_capacity(stack.len());
    for (idx, &(sum, weight, start)) in stack.iter().enumerate() {
        let end = stack.get(idx + 1).map_or(n, |b| b.2) - 1;
        let value = if start == end {
            v.values[start]
        } else {
            sum / weight
        };
        fitted[start..=end].iter_mut().for_each(|f| *f = value);
        blocks.push(Block {
            start,
            end,
            value,
            weight,
        });
    }
    BlockSolution { fitted, blocks }
}

/// Projection onto non-increasing vectors: isotonic regression of the reversed
/// vector, reversed back.
pub fn antitonic_regression(v: &WeightedVector) -> BlockSolution {
    let n = v.len();
    let rev = isotonic_regression(&v.reversed());
    let fitted = rev.fitted.into_iter().rev().collect();
    let blocks = rev
        .blocks
        .into_iter()
        .rev()
        .map(|b| Block {
            start: n - 1 - b.end,
            end: n - 1 - b.start,
            ..b
        })
        .collect();
    BlockSolution { fitted, blocks }
}

/// Convenience wrapper for callers that have already validated their weights.
pub(crate) fn isotonic_fit(values: &[f64], weights: &[f64]) -> Result<BlockSolution> {
    Ok(isotonic_regression(&WeightedVector::new(
        values.to_vec(),
        weights.to_vec(),
    )?))
}

pub(crate) fn antitonic_fit(values: &[f64], weights: &[f64]) -> Result<BlockSolution> {
    Ok(antitonic_regression(&WeightedVector::new(
        values.to_vec(),
        weights.to_vec(),
    )?))
}

pub fn is_nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

pub fn is_nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}
