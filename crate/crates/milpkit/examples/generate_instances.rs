//! Generate one instance of each synthetic family, inspect its structure
//! sidecar, and round-trip it through the MPS writer and parser.
//!
//! ```bash
//! cargo run --example generate_instances
//! ```

use milpkit::generators::{
    gen_item_placement, gen_time_indexed, gen_workload, recover_periods, ItemPlacementParams,
    TimeIndexedParams, WorkloadParams,
};
use milpkit::mps::{parse_mps, write_mps};

fn main() {
    // Balanced item placement: binaries x_ij place items into containers,
    // y/z track placement unevenness; a few planted "big" items exceed half
    // a container in some dimension.
    let (ip, ip_view) = gen_item_placement(&ItemPlacementParams {
        items: 20,
        containers: 6,
        big_item_count: 3,
        seed: 7,
        ..Default::default()
    })
    .expect("item placement generates");
    let data = ip_view.item_placement().unwrap();
    println!(
        "item placement : {} vars ({} binary), {} rows, big items {:?}, trivial bound {:.3}",
        ip.num_vars(),
        ip.num_int(),
        ip.num_constraints(),
        data.big_items,
        ip_view.trivial_bound,
    );

    // Workload apportionment: flows x_ij spread tasks over machines, y_j
    // counts open machines, and the plan survives any single failure.
    let (wl, wl_view) = gen_workload(&WorkloadParams {
        tasks: 12,
        machines: 6,
        seed: 7,
        ..Default::default()
    })
    .expect("workload generates");
    let wdata = wl_view.workload().unwrap();
    println!(
        "workload       : {} vars, {} rows ({} robustness), trivial bound {:.3}",
        wl.num_vars(),
        wl.num_constraints(),
        wdata.robust_rows.1 - wdata.robust_rows.0,
        wl_view.trivial_bound,
    );

    // Time-indexed: integer blocks per period, constraints couple periods at
    // most `window` apart, and the labels are recoverable from the
    // constraint hypergraph alone.
    let (ti, ti_view) = gen_time_indexed(&TimeIndexedParams {
        horizon: 6,
        vars_per_period: 4,
        seed: 7,
        ..Default::default()
    })
    .expect("time indexed generates");
    let planted = &ti_view.time_indexed().unwrap().periods;
    let recovered = recover_periods(&ti);
    let matches = recovered
        .periods
        .iter()
        .flatten()
        .zip(planted)
        .filter(|(r, p)| *r == *p)
        .count();
    println!(
        "time indexed   : {} vars over {} periods, recovery matched {}/{} labels",
        ti.num_vars(),
        ti_view.time_indexed().unwrap().horizon(),
        matches,
        planted.len(),
    );

    // Everything serializes to MPS and parses back identically.
    for (name, inst) in [("item placement", &ip), ("workload", &wl), ("time indexed", &ti)] {
        let text = write_mps(inst);
        let back = parse_mps(&text).expect("own output parses");
        assert_eq!(&back, inst);
        println!("round trip     : {name} OK ({} bytes of MPS)", text.len());
    }
}
