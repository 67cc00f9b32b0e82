//! Scorer training: multinomial logistic regression over the candidates of
//! each branching node, labels from the strong-branching argmax.
//!
//! Full-batch gradient descent with a backtracking step size, L2 penalty on
//! the weights (never the bias), run to a gradient-norm target or a step
//! cap. Deterministic given the data order and the initial point.

use serde::{Deserialize, Serialize};

use super::features::NUM_FEATURES;
use super::scorer::ScorerParams;

/// One labeled branching node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DaggerSample {
    pub features: Vec<[f64; NUM_FEATURES]>,
    /// Index into `features` of the oracle's choice.
    pub oracle_argmax: usize,
    pub oracle_scores: Vec<f64>,
    /// Aggregation round that produced this sample.
    pub round: usize,
}

/// Aggregated dataset; grows monotonically across rounds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DaggerDataset {
    pub samples: Vec<DaggerSample>,
}

impl DaggerDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn merge(&mut self, other: DaggerDataset) {
        self.samples.extend(other.samples);
    }

    /// JSON lines, one sample per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&crate::jsonio::to_string(s).expect("sample serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> serde_json::Result<Self> {
        let samples = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DaggerDataset { samples })
    }
}

pub const GRAD_TOL: f64 = 1e-5;
pub const MAX_STEPS: usize = 2000;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ScorerParams,
    pub steps: usize,
    pub final_grad_norm: f64,
    /// Set when every sample had a single candidate; the returned
    /// parameters are the initial point.
    pub degenerate: bool,
}

/// Cross-entropy loss and its gradient at `theta`.
pub fn loss_and_grad(data: &DaggerDataset, theta: &ScorerParams, l2: f64) -> (f64, Vec<f64>) {
    let dim = ScorerParams::LEN;
    let mut loss = 0.0;
    let mut grad = vec![0.0; dim];
    for sample in &data.samples {
        if sample.features.len() < 2 {
            continue;
        }
        let scores = theta.scores(&sample.features);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        loss += z.ln() + max - scores[sample.oracle_argmax];
        for (i, row) in sample.features.iter().enumerate() {
            let p = exps[i] / z;
            let indicator = if i == sample.oracle_argmax { 1.0 } else { 0.0 };
            let coeff = p - indicator;
            for k in 0..NUM_FEATURES {
                grad[k] += coeff * row[k];
            }
            grad[NUM_FEATURES] += coeff;
        }
    }
    for k in 0..NUM_FEATURES {
        loss += 0.5 * l2 * theta.theta[k] * theta.theta[k];
        grad[k] += l2 * theta.theta[k];
    }
    (loss, grad)
}

/// Trains the scorer on `data`. Samples with a single candidate carry no
/// signal and are skipped; a dataset with nothing else returns the initial
/// point flagged degenerate.
pub fn train_scorer(data: &DaggerDataset, l2: f64, init: Option<&ScorerParams>) -> TrainOutcome {
    let mut theta = init.cloned().unwrap_or_else(ScorerParams::zeros);
    if !data.samples.iter().any(|s| s.features.len() >= 2) {
        return TrainOutcome {
            params: theta,
            steps: 0,
            final_grad_norm: 0.0,
            degenerate: true,
        };
    }

    let (mut loss, mut grad) = loss_and_grad(data, &theta, l2);
    let mut lr = 1.0;
    let mut steps = 0;
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    while steps < MAX_STEPS && norm(&grad) > GRAD_TOL {
        steps += 1;
        // Backtracking: shrink until the step improves the loss.
        loop {
            let trial = ScorerParams {
                theta: theta
                    .theta
                    .iter()
                    .zip(&grad)
                    .map(|(t, g)| t - lr * g)
                    .collect(),
            };
            let (trial_loss, trial_grad) = loss_and_grad(data, &trial, l2);
            if trial_loss <= loss || lr < 1e-12 {
                theta = trial;
                loss = trial_loss;
                grad = trial_grad;
                lr *= 1.2;
                break;
            }
            lr *= 0.5;
        }
    }
    TrainOutcome {
        final_grad_norm: norm(&grad),
        params: theta,
        steps,
        degenerate: false,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn row(vals: &[f64]) -> [f64; NUM_FEATURES] {
        let mut r = [0.0; NUM_FEATURES];
        r[..vals.len()].copy_from_slice(vals);
        r
    }

    fn separable_dataset() -> DaggerDataset {
        // The oracle always prefers the candidate with the largest first
        // feature; linearly separable by theta = e_0.
        let mut samples = Vec::new();
        for k in 0..20 {
            let lo = 0.1 + 0.02 * k as f64 % 0.3;
            let hi = 0.6 + 0.015 * k as f64 % 0.35;
            let rows = vec![row(&[lo, 0.5]), row(&[hi, 0.5]), row(&[lo * 0.5, 0.2])];
            samples.push(DaggerSample {
                features: rows,
                oracle_argmax: 1,
                oracle_scores: vec![lo, hi, lo * 0.5],
                round: 0,
            });
        }
        DaggerDataset { samples }
    }

    #[test]
    fn separable_data_reaches_perfect_training_accuracy() {
        let data = separable_dataset();
        let out = train_scorer(&data, 1e-6, None);
        assert!(!out.degenerate);
        for s in &data.samples {
            let scores = out.params.scores(&s.features);
            let argmax = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(argmax, s.oracle_argmax);
        }
    }

    #[test]
    fn huge_l2_drives_weights_to_zero() {
        let data = separable_dataset();
        let out = train_scorer(&data, 1e9, None);
        for k in 0..NUM_FEATURES {
            assert!(
                out.params.theta[k].abs() < 1e-6,
                "weight {k} = {}",
                out.params.theta[k]
            );
        }
    }

    #[test]
    fn degenerate_single_candidate_data_returns_init() {
        let data = DaggerDataset {
            samples: vec![DaggerSample {
                features: vec![row(&[0.5])],
                oracle_argmax: 0,
                oracle_scores: vec![1.0],
                round: 0,
            }],
        };
        let init = ScorerParams {
            theta: vec![0.25; ScorerParams::LEN],
        };
        let out = train_scorer(&data, 0.1, Some(&init));
        assert!(out.degenerate);
        assert_eq!(out.params, init);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let data = separable_dataset();
        let l2 = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let theta = ScorerParams {
                theta: (0..ScorerParams::LEN)
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect(),
            };
            let (_, grad) = loss_and_grad(&data, &theta, l2);
            let h = 1e-6;
            for k in 0..ScorerParams::LEN {
                let mut up = theta.clone();
                up.theta[k] += h;
                let mut dn = theta.clone();
                dn.theta[k] -= h;
                let fd = (loss_and_grad(&data, &up, l2).0 - loss_and_grad(&data, &dn, l2).0)
                    / (2.0 * h);
                let denom = 1.0_f64.max(grad[k].abs());
                assert!(
                    (grad[k] - fd).abs() / denom < 1e-5,
                    "component {k}: analytic {} vs fd {fd}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let data = separable_dataset();
        let text = data.to_jsonl();
        let back = DaggerDataset::from_jsonl(&text).unwrap();
        assert_eq!(back.len(), data.len());
        assert_eq!(back.samples[3].features, data.samples[3].features);
    }
}
