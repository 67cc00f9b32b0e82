//! Bagged regression trees as the tuning surrogate.
//!
//! Mean prediction is the ensemble mean, uncertainty the ensemble spread.
//! Feature importance is the total squared-error reduction credited to each
//! feature across all splits, which the space-reduction stage aggregates
//! per parameter.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const TREES: usize = 32;
const MAX_DEPTH: usize = 8;
const MIN_LEAF: usize = 2;

enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

pub struct Forest {
    trees: Vec<Tree>,
    /// Squared-error reduction per feature, summed over all splits.
    pub importance: Vec<f64>,
    dim: usize,
}

impl Forest {
    /// Fits 32 bootstrap trees. Deterministic given data order and seed.
    pub fn fit(xs: &[Vec<f64>], ys: &[f64], seed: u64) -> Forest {
        assert_eq!(xs.len(), ys.len());
        assert!(!xs.is_empty(), "cannot fit an empty dataset");
        let dim = xs[0].len();
        let mut importance = vec![0.0; dim];
        let mut trees = Vec::with_capacity(TREES);
        for t in 0..TREES {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9e3779b9));
            let idx: Vec<usize> = (0..xs.len()).map(|_| rng.gen_range(0..xs.len())).collect();
            let mut nodes = Vec::new();
            build(xs, ys, &idx, 0, &mut nodes, &mut importance, &mut rng);
            trees.push(Tree { nodes });
        }
        Forest {
            trees,
            importance,
            dim,
        }
    }

    /// Ensemble mean and spread (population variance across trees).
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        assert_eq!(x.len(), self.dim);
        let preds: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        let mean = preds.iter().sum::<f64>() / preds.len() as f64;
        let var = preds.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / preds.len() as f64;
        (mean, var.max(0.0))
    }
}

fn build(
    xs: &[Vec<f64>],
    ys: &[f64],
    idx: &[usize],
    depth: usize,
    nodes: &mut Vec<Node>,
    importance: &mut [f64],
    rng: &mut ChaCha8Rng,
) -> usize {
    let mean = idx.iter().map(|&i| ys[i]).sum::<f64>() / idx.len() as f64;
    let sse: f64 = idx.iter().map(|&i| (ys[i] - mean) * (ys[i] - mean)).sum();
    if depth >= MAX_DEPTH || idx.len() < 2 * MIN_LEAF || sse <= 1e-12 {
        nodes.push(Node::Leaf(mean));
        return nodes.len() - 1;
    }

    let dim = xs[0].len();
    // Feature bagging: consider ~80% of the features per node.
    let mut feats: Vec<usize> = (0..dim).collect();
    feats.shuffle(rng);
    let take = ((dim as f64 * 0.8).ceil() as usize).clamp(1, dim);
    feats.truncate(take);
    feats.sort_unstable();

    let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, gain)
    for &f in &feats {
        let mut vals: Vec<f64> = idx.iter().map(|&i| xs[i][f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let thr = 0.5 * (w[0] + w[1]);
            let (mut ln, mut ls, mut rn, mut rs) = (0usize, 0.0, 0usize, 0.0);
            for &i in idx {
                if xs[i][f] <= thr {
                    ln += 1;
                    ls += ys[i];
                } else {
                    rn += 1;
                    rs += ys[i];
                }
            }
            if ln < MIN_LEAF || rn < MIN_LEAF {
                continue;
            }
            let (lm, rm) = (ls / ln as f64, rs / rn as f64);
            let mut split_sse = 0.0;
            for &i in idx {
                let m = if xs[i][f] <= thr { lm } else { rm };
                split_sse += (ys[i] - m) * (ys[i] - m);
            }
            let gain = sse - split_sse;
            match best {
                Some((_, _, bg)) if gain <= bg => {}
                _ => best = Some((f, thr, gain)),
            }
        }
    }

    let Some((feature, threshold, gain)) = best else {
        nodes.push(Node::Leaf(mean));
        return nodes.len() - 1;
    };
    if gain <= 1e-12 {
        nodes.push(Node::Leaf(mean));
        return nodes.len() - 1;
    }
    importance[feature] += gain;

    let left_idx: Vec<usize> = idx.iter().copied().filter(|&i| xs[i][feature] <= threshold).collect();
    let right_idx: Vec<usize> = idx.iter().copied().filter(|&i| xs[i][feature] > threshold).collect();
    let at = nodes.len();
    nodes.push(Node::Leaf(0.0)); // placeholder
    let left = build(xs, ys, &left_idx, depth + 1, nodes, importance, rng);
    let right = build(xs, ys, &right_idx, depth + 1, nodes, importance, rng);
    nodes[at] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    at
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_linear_function_is_fit_within_ten_percent() {
        let xs: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64 / 31.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x[0]).collect();
        let forest = Forest::fit(&xs, &ys, 1);
        for (x, y) in xs.iter().zip(&ys) {
            let (mean, var) = forest.predict(x);
            assert!(var >= 0.0);
            assert!(
                (mean - y).abs() <= 0.1 * y.abs(),
                "predicted {mean} for target {y}"
            );
        }
    }

    #[test]
    fn importance_concentrates_on_the_informative_feature() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<Vec<f64>> = (0..64)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| 10.0 * x[0]).collect();
        let forest = Forest::fit(&xs, &ys, 7);
        assert!(forest.importance[0] > 10.0 * forest.importance[1]);
    }

    #[test]
    fn duplicated_training_points_keep_variance_nonnegative() {
        let xs = vec![vec![0.5, 0.5]; 10];
        let ys = vec![1.0; 10];
        let forest = Forest::fit(&xs, &ys, 5);
        let (mean, var) = forest.predict(&[0.5, 0.5]);
        assert!((mean - 1.0).abs() < 1e-9);
        assert!(var >= 0.0);
    }

    #[test]
    fn fit_is_deterministic_per_seed() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 5) as f64, (i / 5) as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * 2.0 - x[1]).collect();
        let a = Forest::fit(&xs, &ys, 11);
        let b = Forest::fit(&xs, &ys, 11);
        for x in &xs {
            assert_eq!(a.predict(x), b.predict(x));
        }
    }
}
