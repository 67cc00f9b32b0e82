//! Dataset aggregation rounds.
//!
//! Round zero rolls out the strong-branching oracle itself; every later
//! round rolls out the most recent scorer, labels its nodes with the oracle,
//! and retrains warm-started from the previous parameters. All round models
//! are returned as candidates for weight averaging.

use crate::bnb::{
    solve_with_observer, BnbConfig, BranchObserver, BranchSample, BranchingRule, NodeSelection,
};
use crate::clock::SimClock;
use crate::model::MilpInstance;

use super::scorer::ScorerParams;
use super::train::{train_scorer, DaggerDataset, DaggerSample};

#[derive(Debug, Clone)]
pub struct CollectOptions {
    /// At most this many labeled nodes per instance.
    pub node_cap: usize,
    /// Simulated-seconds budget per instance.
    pub budget_per_instance: f64,
    /// Candidate set size for both labels and rollout decisions.
    pub sb_candidate_limit: usize,
}

impl Default for CollectOptions {
    fn default() -> Self {
        CollectOptions {
            node_cap: 50,
            budget_per_instance: 20.0,
            sb_candidate_limit: 8,
        }
    }
}

/// The rolled-out branching policy.
pub enum CollectPolicy<'a> {
    /// Strong branching itself: choices coincide with the labels.
    Oracle,
    Scorer(&'a ScorerParams),
}

struct Collector {
    samples: Vec<BranchSample>,
    cap: usize,
}

impl BranchObserver for Collector {
    fn on_branch(&mut self, sample: BranchSample) {
        if self.samples.len() < self.cap {
            self.samples.push(sample);
        }
    }

    fn want_more(&self) -> bool {
        self.samples.len() < self.cap
    }
}

/// Rolls out `policy` on every instance and labels each visited branching
/// node with strong-branching scores. Returns the collected samples tagged
/// with `round`.
pub fn collect_sb_data(
    instances: &[MilpInstance],
    policy: CollectPolicy,
    opts: &CollectOptions,
    round: usize,
) -> DaggerDataset {
    let rule = match &policy {
        CollectPolicy::Oracle => BranchingRule::StrongBranching,
        CollectPolicy::Scorer(p) => BranchingRule::Learned((*p).clone()),
    };
    let mut out = DaggerDataset::default();
    for inst in instances {
        let cfg = BnbConfig {
            node_selection: NodeSelection::DepthFirst,
            branching_rule: rule.clone(),
            sb_candidate_limit: opts.sb_candidate_limit,
            time_limit: opts.budget_per_instance,
            primal_heuristics_enabled: false,
            ..BnbConfig::default()
        };
        let mut collector = Collector {
            samples: Vec::new(),
            cap: opts.node_cap,
        };
        let clock = SimClock::new();
        if solve_with_observer(inst, &cfg, None, &clock, Some(&mut collector)).is_err() {
            continue;
        }
        for s in collector.samples {
            out.samples.push(DaggerSample {
                features: s.features,
                oracle_argmax: s.oracle_argmax,
                oracle_scores: s.oracle_scores,
                round,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct DaggerOutcome {
    /// One parameter vector per round, in training order.
    pub candidates: Vec<ScorerParams>,
    /// Dataset size after each round.
    pub dataset_sizes: Vec<usize>,
    pub dataset: DaggerDataset,
}

/// Runs `rounds` aggregation rounds over the training instances.
pub fn dagger_loop(
    instances: &[MilpInstance],
    rounds: usize,
    opts: &CollectOptions,
    l2: f64,
) -> DaggerOutcome {
    assert!(rounds >= 1, "at least one round");
    let mut dataset = DaggerDataset::default();
    let mut candidates: Vec<ScorerParams> = Vec::new();
    let mut sizes = Vec::new();
    for round in 0..rounds {
        let policy = match candidates.last() {
            None => CollectPolicy::Oracle,
            Some(p) => CollectPolicy::Scorer(p),
        };
        let fresh = collect_sb_data(instances, policy, opts, round);
        dataset.merge(fresh);
        sizes.push(dataset.len());
        let init = candidates.last().cloned();
        let trained = train_scorer(&dataset, l2, init.as_ref());
        candidates.push(trained.params);
    }
    DaggerOutcome {
        candidates,
        dataset_sizes: sizes,
        dataset,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::bnb::branch_select_argmax;

    fn binary_training_set(count: usize) -> Vec<MilpInstance> {
        (0..count)
            .map(|seed| random_knapsack(seed as u64 * 13 + 3, 10, 3))
            .collect()
    }

    /// Multi-knapsack with negative profits: always feasible, LP optima
    /// reliably fractional.
    pub(crate) fn random_knapsack(seed: u64, n: usize, m: usize) -> MilpInstance {
        use crate::model::{Constraint, Sense};
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objective: Vec<f64> = (0..n).map(|_| -rng.gen_range(1.0..9.0)).collect();
        let mut constraints = Vec::new();
        for _ in 0..m {
            let coeffs: Vec<(usize, f64)> =
                (0..n).map(|j| (j, rng.gen_range(1.0..5.0))).collect();
            let total: f64 = coeffs.iter().map(|&(_, w)| w).sum();
            constraints.push(Constraint::new(coeffs, Sense::Le, 0.4 * total));
        }
        MilpInstance::new(
            format!("knap{seed}"),
            objective,
            constraints,
            vec![0.0; n],
            vec![1.0; n],
            vec![true; n],
            (0..n).map(|j| format!("x{j}")).collect(),
            (0..m).map(|r| format!("c{r}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn oracle_rollout_choices_agree_with_labels() {
        let instances = binary_training_set(4);
        let data = collect_sb_data(
            &instances,
            CollectPolicy::Oracle,
            &CollectOptions::default(),
            0,
        );
        assert!(!data.is_empty(), "no branching nodes collected");
        // The rolled-out policy is the oracle itself; its choice must be
        // the oracle argmax at every node. Chosen is recorded per sample in
        // the bnb layer; here the invariant shows as consistent argmaxes.
        for s in &data.samples {
            let scored: Vec<(usize, f64)> = s
                .oracle_scores
                .iter()
                .enumerate()
                .map(|(i, &v)| (i, v))
                .collect();
            assert_eq!(branch_select_argmax(&scored), Some(s.oracle_argmax));
        }
    }

    #[test]
    fn node_cap_bounds_the_sample_count() {
        let instances = binary_training_set(3);
        let opts = CollectOptions {
            node_cap: 5,
            ..Default::default()
        };
        let data = collect_sb_data(&instances, CollectPolicy::Oracle, &opts, 0);
        assert!(data.len() <= 15);
    }

    #[test]
    fn dataset_grows_and_each_round_yields_a_candidate() {
        let instances = binary_training_set(3);
        let opts = CollectOptions {
            node_cap: 20,
            ..Default::default()
        };
        let out = dagger_loop(&instances, 3, &opts, 1e-4);
        assert_eq!(out.candidates.len(), 3);
        assert!(out.dataset_sizes.windows(2).all(|w| w[0] <= w[1]));
        assert!(out.dataset_sizes[0] > 0);
        // Round tags are non-decreasing in sample order.
        let rounds: Vec<usize> = out.dataset.samples.iter().map(|s| s.round).collect();
        assert!(rounds.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn single_round_is_pure_behavioral_cloning() {
        let instances = binary_training_set(2);
        let out = dagger_loop(&instances, 1, &CollectOptions::default(), 1e-4);
        assert_eq!(out.candidates.len(), 1);
        assert!(out.candidates[0].is_finite());
    }
}
