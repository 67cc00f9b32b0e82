//! Solve a small instance with branch and bound under the simulated clock
//! and compute the three time-integral metrics from its bound timeline.
//!
//! ```bash
//! cargo run --example solve_and_metrics
//! ```

use milpkit::bnb::{solve, BnbConfig, NodeSelection};
use milpkit::clock::SimClock;
use milpkit::generators::{gen_workload, WorkloadParams};
use milpkit::metrics::{dual_integral, gap_integral, primal_integral};

fn main() {
    let (inst, view) = gen_workload(&WorkloadParams {
        tasks: 10,
        machines: 6,
        seed: 42,
        ..Default::default()
    })
    .expect("generates");

    let cfg = BnbConfig {
        node_selection: NodeSelection::BestBound,
        time_limit: 15.0, // simulated seconds
        // The trivial solution value is supplied as a user objective limit,
        // which doubles as the initial primal bound of the timeline.
        objective_limit: Some(view.trivial_bound),
        ..BnbConfig::default()
    };
    let clock = SimClock::new();
    let result = solve(&inst, &cfg, None, &clock).expect("solves");

    println!("status     : {:?}", result.status);
    println!("nodes      : {}", result.nodes);
    if let Some(best) = &result.best {
        println!("objective  : {:.6}", best.objective);
    }

    let tl = &result.timeline;
    println!(
        "timeline   : T = {:.1}s, {} events, initial bounds ({:.3}, {:.3})",
        tl.horizon,
        tl.events.len(),
        tl.initial_primal,
        tl.initial_dual,
    );

    // With the optimum in hand, both one-sided integrals are exact.
    let opt = result.best.as_ref().map(|s| s.objective).unwrap_or(tl.final_dual());
    let pi = primal_integral(tl, opt).expect("valid timeline");
    let di = dual_integral(tl, opt).expect("valid timeline");
    let gi = gap_integral(tl).expect("both tracks defined from t = 0");
    println!("primal integral : {pi:.4}");
    println!("dual integral   : {di:.4}");
    println!("gap integral    : {gi:.4}");

    // The additivity identity ties the three together for any constant.
    let check = primal_integral(tl, 17.3).unwrap() + dual_integral(tl, 17.3).unwrap();
    assert!((gi - check).abs() <= 1e-9 * (1.0 + gi.abs()));
    println!("identity        : gap = primal(v) + dual(v) holds");
}
