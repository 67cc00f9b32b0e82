//! Train a branching scorer by dataset aggregation, derive weight-averaged
//! candidates, and select the final model by validation cumulated reward.
//!
//! ```bash
//! cargo run --release --example train_branching
//! ```

use milpkit::generators::{gen_item_placement, ItemPlacementParams};
use milpkit::learner::{
    collect_sb_data, dagger_loop, greedy_omega_search, top_k_sba, CollectOptions, CollectPolicy,
    SolverCrEvaluator,
};

fn corpus(range: std::ops::Range<u64>) -> Vec<milpkit::MilpInstance> {
    range
        .map(|seed| {
            gen_item_placement(&ItemPlacementParams {
                items: 10,
                containers: 4,
                big_item_count: 2,
                seed,
                ..Default::default()
            })
            .expect("generates")
            .0
        })
        .collect()
}

fn main() {
    let train = corpus(0..6);
    let valid = corpus(100..104);

    let opts = CollectOptions {
        node_cap: 30,
        budget_per_instance: 10.0,
        sb_candidate_limit: 8,
    };
    let rounds = 3;
    let outcome = dagger_loop(&train, rounds, &opts, 1e-4);
    println!("dataset sizes per round: {:?}", outcome.dataset_sizes);

    // Held-out oracle labels for imitation accuracy.
    let heldout = collect_sb_data(&valid, CollectPolicy::Oracle, &opts, usize::MAX);
    for (r, params) in outcome.candidates.iter().enumerate() {
        println!(
            "round {r}: top-1 SBA {:.3}, top-3 SBA {:.3}",
            top_k_sba(params, &heldout, 1),
            top_k_sba(params, &heldout, 3),
        );
    }

    // Selection goes by cumulated reward, not SBA: evaluate every suffix
    // average (omega = 1, the raw latest model, included).
    let evaluator = SolverCrEvaluator {
        instances: &valid,
        time_limit: 8.0,
        sb_candidate_limit: opts.sb_candidate_limit,
    };
    let (best, report) = greedy_omega_search(&outcome.candidates, rounds, &evaluator);
    println!("omega  validation CR");
    for row in &report.table {
        let marker = if row.omega == report.chosen_omega { " <- chosen" } else { "" };
        println!("{:<6} {:.3}{marker}", row.omega, row.cr);
    }
    println!(
        "selected omega {} with top-1 SBA {:.3} on held-out labels",
        report.chosen_omega,
        top_k_sba(&best, &heldout, 1),
    );
}
