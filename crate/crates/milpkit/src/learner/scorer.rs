//! Linear softmax branching scorer.
//!
//! Scores are `theta . features + bias` per candidate; the branching rule
//! takes the argmax. Training (multinomial logistic over the candidates of
//! each node) lives in `train`; this module is just the parameter vector and
//! its application, which the solver calls once per node.

use serde::{Deserialize, Serialize};

use super::features::NUM_FEATURES;

/// Flat parameter vector: 12 feature weights plus a bias term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerParams {
    pub theta: Vec<f64>,
}

impl ScorerParams {
    pub const LEN: usize = NUM_FEATURES + 1;

    pub fn zeros() -> Self {
        ScorerParams {
            theta: vec![0.0; Self::LEN],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|v| v.is_finite())
    }

    /// Score of one feature row.
    pub fn score(&self, row: &[f64; NUM_FEATURES]) -> f64 {
        let mut s = self.theta[NUM_FEATURES]; // bias
        for k in 0..NUM_FEATURES {
            s += self.theta[k] * row[k];
        }
        s
    }

    /// Scores for a feature matrix.
    pub fn scores(&self, rows: &[[f64; NUM_FEATURES]]) -> Vec<f64> {
        rows.iter().map(|r| self.score(r)).collect()
    }
}

/// Arithmetic mean of parameter vectors: `theta_avg = sum(theta_i) / omega`.
///
/// Computed anchored at the first vector, `theta_0 + sum(theta_i - theta_0)
/// / omega`, so averaging identical vectors is exact and a single vector
/// averages to itself bit for bit.
pub fn average_weights(candidates: &[ScorerParams], subset: &[usize]) -> ScorerParams {
    assert!(!subset.is_empty(), "average over an empty subset");
    let anchor = &candidates[subset[0]].theta;
    let dim = anchor.len();
    let mut delta = vec![0.0; dim];
    for &i in &subset[1..] {
        assert_eq!(
            candidates[i].theta.len(),
            dim,
            "dimension mismatch in weight averaging"
        );
        for (acc, (v, a)) in delta.iter_mut().zip(candidates[i].theta.iter().zip(anchor)) {
            *acc += v - a;
        }
    }
    let omega = subset.len() as f64;
    let theta = anchor
        .iter()
        .zip(&delta)
        .map(|(a, d)| a + d / omega)
        .collect();
    ScorerParams { theta }
}
