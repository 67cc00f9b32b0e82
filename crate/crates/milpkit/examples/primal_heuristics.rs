//! Run the family-specific primal pipelines and compare each primal
//! integral against the trivial-bound-only baseline.
//!
//! ```bash
//! cargo run --release --example primal_heuristics
//! ```

use milpkit::clock::SimClock;
use milpkit::generators::{
    gen_item_placement, gen_time_indexed, gen_workload, ItemPlacementParams, StructuredView,
    TimeIndexedParams, WorkloadParams,
};
use milpkit::heuristics::{primal_pipeline, HeuristicBudget};
use milpkit::metrics::{primal_integral, BoundsTimeline};
use milpkit::MilpInstance;

fn run(name: &str, inst: &MilpInstance, view: &StructuredView) {
    let budget = HeuristicBudget {
        wall_seconds: 8.0,
        submip_seconds: 2.0,
        max_iterations: 200,
    };
    let clock = SimClock::new();
    let out = primal_pipeline(inst, Some(view), &budget, &clock);

    // Opt source: the enumerated optimum when the generator could afford
    // it, otherwise the best value this run found (a substitute).
    let opt = view
        .planted_optimum
        .unwrap_or_else(|| out.timeline.final_primal());
    let pi = primal_integral(&out.timeline, opt).expect("valid timeline");
    let trivial_only = BoundsTimeline::new(budget.wall_seconds, view.trivial_bound, f64::NEG_INFINITY);
    let pi_trivial = primal_integral(&trivial_only, opt).expect("valid timeline");

    println!(
        "{name:<15} trivial {:>9.3} -> best {:>9.3}   primal integral {:>9.4} (trivial-only {:>9.4})",
        view.trivial_bound,
        out.timeline.final_primal(),
        pi,
        pi_trivial,
    );
    assert!(pi <= pi_trivial + 1e-9);
}

fn main() {
    println!("family          bounds                              primal integrals");
    let (inst, view) = gen_item_placement(&ItemPlacementParams {
        items: 24,
        containers: 6,
        big_item_count: 3,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    run("item placement", &inst, &view);

    let (inst, view) = gen_workload(&WorkloadParams {
        tasks: 14,
        machines: 8,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    run("workload", &inst, &view);

    let (inst, view) = gen_time_indexed(&TimeIndexedParams {
        horizon: 6,
        vars_per_period: 4,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    run("time indexed", &inst, &view);
}
