//! Item placement heuristics: big-item preplacement, greedy construction,
//! swap improvement, two-stage sub-MIP construction, and pairwise container
//! reassignment.
//!
//! All of them work on the assignment level (item -> container) and complete
//! `y`/`z` at their implied minimal values, so feasibility reduces to the
//! knapsack capacities.

use std::collections::BTreeMap;

use crate::bnb::{solve, solve_submip, BnbConfig, BranchingRule, NodeSelection};
use crate::clock::Clock;
use crate::generators::{ItemPlacementData, StructuredView};
use crate::lp::LpOptions;
use crate::model::{check_feasibility, MilpInstance, Sense, Solution};

use super::{HeuristicBudget, HeuristicError};

fn data_of(view: &StructuredView) -> Result<&ItemPlacementData, HeuristicError> {
    view.item_placement().ok_or(HeuristicError::WrongFamily {
        expected: "item placement",
    })
}

/// Items whose size exceeds half the capacity in at least one dimension
/// (strictly), sorted descending by `max_k a_ik / b_k`.
pub fn detect_big_items(view: &StructuredView) -> Result<Vec<usize>, HeuristicError> {
    let data = data_of(view)?;
    let ratio = |i: usize| {
        (0..data.dims())
            .map(|k| data.sizes[i][k] / data.capacity[k])
            .fold(0.0, f64::max)
    };
    let mut big: Vec<usize> = (0..data.items())
        .filter(|&i| (0..data.dims()).any(|k| data.sizes[i][k] > data.capacity[k] / 2.0))
        .collect();
    big.sort_by(|&a, &b| ratio(b).partial_cmp(&ratio(a)).unwrap().then(a.cmp(&b)));
    Ok(big)
}

/// Fixes big item of rank `r` into container `r`: its placement column is
/// set and all other columns of that item are zeroed.
pub fn preplace_big_items(
    view: &StructuredView,
    big: &[usize],
) -> Result<BTreeMap<usize, f64>, HeuristicError> {
    let data = data_of(view)?;
    if big.len() > data.containers() {
        return Err(HeuristicError::BigItemOverflow {
            count: big.len(),
            containers: data.containers(),
        });
    }
    let mut fixings = BTreeMap::new();
    for (rank, &item) in big.iter().enumerate() {
        for j in 0..data.containers() {
            fixings.insert(data.x_index(item, j), if j == rank { 1.0 } else { 0.0 });
        }
    }
    Ok(fixings)
}

/// Container pre-assignments encoded in a fixing map.
fn fixed_assignments(data: &ItemPlacementData, fixings: &BTreeMap<usize, f64>) -> Vec<Option<usize>> {
    let mut assign = vec![None; data.items()];
    for (&idx, &v) in fixings {
        if v == 1.0 && idx < data.items() * data.containers() {
            let (i, j) = (idx / data.containers(), idx % data.containers());
            assign[i] = Some(j);
        }
    }
    assign
}

/// Greedy construction: items sorted descending by normalized size, each
/// assigned to the feasible container with the smallest objective increase.
pub fn greedy_construct(
    inst: &MilpInstance,
    view: &StructuredView,
    fixings: &BTreeMap<usize, f64>,
) -> Result<Solution, HeuristicError> {
    let data = data_of(view)?;
    let pre = fixed_assignments(data, fixings);
    let mut assign = vec![usize::MAX; data.items()];
    let mut used = vec![vec![0.0; data.dims()]; data.containers()];
    let mut d_load = vec![vec![0.0; data.dims()]; data.containers()];
    for (i, &p) in pre.iter().enumerate() {
        if let Some(j) = p {
            assign[i] = j;
            for k in 0..data.dims() {
                used[j][k] += data.sizes[i][k];
                d_load[j][k] += data.weights[i][k];
            }
        }
    }

    let mut order: Vec<usize> = (0..data.items()).filter(|&i| pre[i].is_none()).collect();
    let norm_size = |i: usize| -> f64 {
        (0..data.dims())
            .map(|k| data.sizes[i][k] / data.capacity[k])
            .sum()
    };
    order.sort_by(|&a, &b| norm_size(b).partial_cmp(&norm_size(a)).unwrap().then(a.cmp(&b)));

    let objective = |d_load: &[Vec<f64>]| -> f64 {
        let mut obj = 0.0;
        for k in 0..data.dims() {
            let mut peak = 0.0_f64;
            for j in 0..data.containers() {
                let y = (1.0 - d_load[j][k]).max(0.0);
                obj += data.alpha[k] * y;
                peak = peak.max(y);
            }
            obj += data.beta[k] * peak;
        }
        obj
    };

    for &i in &order {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..data.containers() {
            if !data.fits(i, &used[j]) {
                continue;
            }
            for k in 0..data.dims() {
                d_load[j][k] += data.weights[i][k];
            }
            let obj = objective(&d_load);
            for k in 0..data.dims() {
                d_load[j][k] -= data.weights[i][k];
            }
            match best {
                Some((_, bobj)) if obj >= bobj => {}
                _ => best = Some((j, obj)),
            }
        }
        let Some((j, _)) = best else {
            return Err(HeuristicError::NoFeasibleContainer { item: i });
        };
        assign[i] = j;
        for k in 0..data.dims() {
            used[j][k] += data.sizes[i][k];
            d_load[j][k] += data.weights[i][k];
        }
    }
    Ok(data.assignment_solution(inst, &assign))
}

/// First-improvement scan over 1-1 and 2-1 item exchanges between container
/// pairs. Only feasibility-preserving, strictly improving moves are taken.
pub fn swap_improve(
    inst: &MilpInstance,
    view: &StructuredView,
    sol: &Solution,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> Result<Solution, HeuristicError> {
    let data = data_of(view)?;
    if !check_feasibility(inst, sol, 1e-6)?.feasible {
        return Err(HeuristicError::InfeasibleInput);
    }
    let deadline = clock.now() + budget.wall_seconds;
    let mut assign = data.assignment_of(&sol.values);
    let mut obj = data.assignment_objective(&assign);

    let mut used = vec![vec![0.0; data.dims()]; data.containers()];
    for (i, &j) in assign.iter().enumerate() {
        for k in 0..data.dims() {
            used[j][k] += data.sizes[i][k];
        }
    }

    let fits_after = |data: &ItemPlacementData,
                      used: &[Vec<f64>],
                      j: usize,
                      add: &[usize],
                      remove: &[usize]| {
        (0..data.dims()).all(|k| {
            let mut load = used[j][k];
            for &i in remove {
                load -= data.sizes[i][k];
            }
            for &i in add {
                load += data.sizes[i][k];
            }
            load <= data.capacity[k] + 1e-12
        })
    };

    'outer: loop {
        if clock.now() >= deadline {
            break;
        }
        let members: Vec<Vec<usize>> = (0..data.containers())
            .map(|j| (0..data.items()).filter(|&i| assign[i] == j).collect())
            .collect();
        for ja in 0..data.containers() {
            for jb in ja + 1..data.containers() {
                // 1-1 exchanges.
                for &ia in &members[ja] {
                    for &ib in &members[jb] {
                        clock.charge(0.1);
                        if !fits_after(data, &used, ja, &[ib], &[ia])
                            || !fits_after(data, &used, jb, &[ia], &[ib])
                        {
                            continue;
                        }
                        assign[ia] = jb;
                        assign[ib] = ja;
                        let cand = data.assignment_objective(&assign);
                        if cand < obj - 1e-9 {
                            obj = cand;
                            for k in 0..data.dims() {
                                used[ja][k] += data.sizes[ib][k] - data.sizes[ia][k];
                                used[jb][k] += data.sizes[ia][k] - data.sizes[ib][k];
                            }
                            continue 'outer;
                        }
                        assign[ia] = ja;
                        assign[ib] = jb;
                    }
                }
                // 2-1 exchanges: two items leave ja, one leaves jb.
                for a1 in 0..members[ja].len() {
                    for a2 in a1 + 1..members[ja].len() {
                        for &ib in &members[jb] {
                            clock.charge(0.1);
                            let (i1, i2) = (members[ja][a1], members[ja][a2]);
                            if !fits_after(data, &used, ja, &[ib], &[i1, i2])
                                || !fits_after(data, &used, jb, &[i1, i2], &[ib])
                            {
                                continue;
                            }
                            assign[i1] = jb;
                            assign[i2] = jb;
                            assign[ib] = ja;
                            let cand = data.assignment_objective(&assign);
                            if cand < obj - 1e-9 {
                                obj = cand;
                                for k in 0..data.dims() {
                                    let moved = data.sizes[i1][k] + data.sizes[i2][k];
                                    used[ja][k] += data.sizes[ib][k] - moved;
                                    used[jb][k] += moved - data.sizes[ib][k];
                                }
                                continue 'outer;
                            }
                            assign[i1] = ja;
                            assign[i2] = ja;
                            assign[ib] = jb;
                        }
                    }
                }
                if clock.now() >= deadline {
                    break 'outer;
                }
            }
        }
        break; // full scan without improvement: 2-swap optimal
    }
    Ok(data.assignment_solution(inst, &assign))
}

/// First half of the containers, which hosts the preplaced big items.
fn first_stage_containers(data: &ItemPlacementData) -> usize {
    data.containers().div_ceil(2)
}

/// Two-stage construction: a restricted assignment MILP over the first half
/// of the containers, then a sub-MIP placing the remaining items into the
/// second half. Falls back to greedy construction when a stage fails.
pub fn assignment_construct(
    inst: &MilpInstance,
    view: &StructuredView,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> Result<Solution, HeuristicError> {
    let data = data_of(view)?;
    let big = detect_big_items(view)?;
    let fixings = preplace_big_items(view, &big)?;
    let front = first_stage_containers(data);

    // Degenerate: nothing beyond the preplacement to assign.
    if data.items() == big.len() {
        let mut full = vec![0usize; data.items()];
        for (rank, &item) in big.iter().enumerate() {
            full[item] = rank;
        }
        return Ok(data.assignment_solution(inst, &full));
    }

    let fallback = |_: &dyn Clock| -> Result<Solution, HeuristicError> {
        greedy_construct(inst, view, &fixings)
            .or_else(|_| greedy_construct(inst, view, &BTreeMap::new()))
    };

    // Stage one: minimize restricted unevenness over the first containers,
    // items may stay unassigned (assignment rows become <=).
    let mut stage1 = build_stage_one(inst, data, front)?;
    for (&idx, &v) in &fixings {
        stage1.lower[idx] = v;
        stage1.upper[idx] = v;
    }
    for i in 0..data.items() {
        for j in front..data.containers() {
            let idx = data.x_index(i, j);
            stage1.lower[idx] = 0.0;
            stage1.upper[idx] = 0.0;
        }
    }
    let cfg = BnbConfig {
        node_selection: NodeSelection::Hybrid,
        branching_rule: BranchingRule::MostFractional,
        time_limit: budget.submip_seconds,
        lp: LpOptions::default(),
        ..BnbConfig::default()
    };
    let stage1_best = match solve(&stage1, &cfg, None, clock) {
        Ok(r) => r.best,
        Err(_) => None,
    };
    let Some(stage1_sol) = stage1_best else {
        return fallback(clock);
    };

    // Stage two: fix stage-one placements, route the rest to the back half.
    let mut fix2 = BTreeMap::new();
    for i in 0..data.items() {
        let placed = (0..front).find(|&j| stage1_sol.values[data.x_index(i, j)] > 0.5);
        match placed {
            Some(j) => {
                for jj in 0..data.containers() {
                    fix2.insert(data.x_index(i, jj), if jj == j { 1.0 } else { 0.0 });
                }
            }
            None => {
                for jj in 0..front {
                    fix2.insert(data.x_index(i, jj), 0.0);
                }
            }
        }
    }
    let warm = stage_two_warm(inst, data, &fix2);
    match solve_submip(
        inst,
        &fix2,
        &[],
        &[],
        budget.submip_seconds,
        &LpOptions::default(),
        clock,
        warm.as_ref(),
    ) {
        Ok(Some(sol)) => Ok(sol),
        _ => fallback(clock),
    }
}

/// Stage-one model: assignment rows relaxed to `<=`, capacity rows kept,
/// unevenness and peak rows restricted to the first `front` containers.
fn build_stage_one(
    inst: &MilpInstance,
    data: &ItemPlacementData,
    front: usize,
) -> Result<MilpInstance, HeuristicError> {
    let items = data.items();
    let containers = data.containers();
    let dims = data.dims();
    let mut rows = Vec::new();
    let mut names = Vec::new();
    for (r, con) in inst.constraints.iter().enumerate() {
        let name = &inst.con_names[r];
        if r < items {
            let mut c = con.clone();
            c.sense = Sense::Le;
            rows.push(c);
            names.push(name.clone());
            continue;
        }
        if r < items + containers * dims {
            rows.push(con.clone()); // capacities stay
            names.push(name.clone());
            continue;
        }
        // Unevenness and peak rows: keep only the first-half containers.
        let local = r - items - containers * dims;
        let j = (local % (containers * dims)) / dims;
        if j < front {
            rows.push(con.clone());
            names.push(name.clone());
        }
    }
    let mut out = inst.with_constraints(rows, names)?;
    // Back-half y variables no longer appear in rows; remove their cost so
    // the restricted objective only scores the first half.
    for j in front..containers {
        for k in 0..dims {
            out.objective[data.y_index(j, k)] = 0.0;
        }
    }
    Ok(out)
}

/// First-fit completion of stage-one placements, used to warm-start stage
/// two. Items without a placement go to the emptiest feasible back-half
/// container.
fn stage_two_warm(
    inst: &MilpInstance,
    data: &ItemPlacementData,
    fix2: &BTreeMap<usize, f64>,
) -> Option<Solution> {
    let pre = fixed_assignments(data, fix2);
    let front = first_stage_containers(data);
    let mut assign = vec![usize::MAX; data.items()];
    let mut used = vec![vec![0.0; data.dims()]; data.containers()];
    for (i, &p) in pre.iter().enumerate() {
        if let Some(j) = p {
            assign[i] = j;
            for k in 0..data.dims() {
                used[j][k] += data.sizes[i][k];
            }
        }
    }
    for i in 0..data.items() {
        if assign[i] != usize::MAX {
            continue;
        }
        let j = (front..data.containers()).find(|&j| data.fits(i, &used[j]))?;
        assign[i] = j;
        for k in 0..data.dims() {
            used[j][k] += data.sizes[i][k];
        }
    }
    Some(data.assignment_solution(inst, &assign))
}

/// Picks the two back-half containers with the largest unevenness
/// contribution and reassigns their items optimally via a sub-MIP. The
/// objective never increases; timeouts return the input unchanged.
pub fn two_container_reassign(
    inst: &MilpInstance,
    view: &StructuredView,
    sol: &Solution,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> Result<Solution, HeuristicError> {
    let data = data_of(view)?;
    if !check_feasibility(inst, sol, 1e-6)?.feasible {
        return Err(HeuristicError::InfeasibleInput);
    }
    let front = first_stage_containers(data);
    if data.containers() - front < 2 {
        return Ok(sol.clone());
    }
    let assign = data.assignment_of(&sol.values);
    let (y, _) = data.completion(&assign);
    let contribution =
        |j: usize| -> f64 { (0..data.dims()).map(|k| data.alpha[k] * y[j][k]).sum() };
    let mut back: Vec<usize> = (front..data.containers()).collect();
    back.sort_by(|&a, &b| {
        contribution(b)
            .partial_cmp(&contribution(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    let (ja, jb) = (back[0].min(back[1]), back[0].max(back[1]));

    let mut fixings = BTreeMap::new();
    for i in 0..data.items() {
        let j = assign[i];
        if j == ja || j == jb {
            // Free between ja and jb, forbidden elsewhere.
            for jj in 0..data.containers() {
                if jj != ja && jj != jb {
                    fixings.insert(data.x_index(i, jj), 0.0);
                }
            }
        } else {
            for jj in 0..data.containers() {
                fixings.insert(data.x_index(i, jj), if jj == j { 1.0 } else { 0.0 });
            }
        }
    }
    match solve_submip(
        inst,
        &fixings,
        &[],
        &[],
        budget.submip_seconds,
        &LpOptions::default(),
        clock,
        Some(sol),
    ) {
        Ok(Some(better)) if better.objective < sol.objective - 1e-9 => Ok(better),
        _ => Ok(sol.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::SimClock;
    use crate::generators::{gen_item_placement, ItemPlacementParams};

    fn small_fixture(seed: u64) -> (MilpInstance, StructuredView) {
        gen_item_placement(&ItemPlacementParams::small(10, 4, seed)).unwrap()
    }

    #[test]
    fn detects_exactly_the_planted_big_items() {
        for seed in 0..10 {
            let (_, view) = small_fixture(seed);
            let mut expected = view.item_placement().unwrap().big_items.clone();
            expected.sort_unstable();
            let mut got = detect_big_items(&view).unwrap();
            got.sort_unstable();
            assert_eq!(got, expected, "seed {seed}");
        }
    }

    #[test]
    fn boundary_items_at_exactly_half_capacity_are_excluded() {
        let (_, mut view) = small_fixture(0);
        if let crate::generators::FamilyData::ItemPlacement(data) = &mut view.data {
            let caps = data.capacity.clone();
            for row in data.sizes.iter_mut() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = caps[k] / 2.0;
                }
            }
        }
        assert!(detect_big_items(&view).unwrap().is_empty());
    }

    #[test]
    fn preplacement_fixes_rank_to_container() {
        let (_, view) = small_fixture(1);
        let data = view.item_placement().unwrap();
        let big = detect_big_items(&view).unwrap();
        let fixings = preplace_big_items(&view, &big).unwrap();
        for (rank, &item) in big.iter().enumerate() {
            assert_eq!(fixings[&data.x_index(item, rank)], 1.0);
        }
        assert!(preplace_big_items(&view, &vec![0; data.containers() + 1]).is_err());
        assert!(preplace_big_items(&view, &[]).unwrap().is_empty());
    }

    #[test]
    fn greedy_is_feasible_and_objective_matches_recomputation() {
        for seed in 0..20 {
            let (inst, view) = small_fixture(seed);
            let big = detect_big_items(&view).unwrap();
            let fixings = preplace_big_items(&view, &big).unwrap();
            let sol = greedy_construct(&inst, &view, &fixings).unwrap();
            assert!(
                check_feasibility(&inst, &sol, 1e-9).unwrap().feasible,
                "seed {seed}"
            );
            let data = view.item_placement().unwrap();
            let assign = data.assignment_of(&sol.values);
            let recomputed = data.assignment_objective(&assign);
            assert!((sol.objective - recomputed).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_never_worsens_and_stays_feasible() {
        let clock = SimClock::new();
        for seed in 0..10 {
            let (inst, view) = small_fixture(seed + 40);
            let sol = greedy_construct(&inst, &view, &BTreeMap::new()).unwrap();
            let improved =
                swap_improve(&inst, &view, &sol, &HeuristicBudget::default(), &clock).unwrap();
            assert!(improved.objective <= sol.objective + 1e-12);
            assert!(check_feasibility(&inst, &improved, 1e-6).unwrap().feasible);
        }
    }

    #[test]
    fn swap_fixed_point_is_returned_unchanged() {
        let clock = SimClock::new();
        let (inst, view) = small_fixture(3);
        let sol = greedy_construct(&inst, &view, &BTreeMap::new()).unwrap();
        let once = swap_improve(&inst, &view, &sol, &HeuristicBudget::default(), &clock).unwrap();
        let twice = swap_improve(&inst, &view, &once, &HeuristicBudget::default(), &clock).unwrap();
        assert_eq!(once.values, twice.values);
    }

    #[test]
    fn assignment_construct_puts_big_items_in_front_half() {
        let clock = SimClock::new();
        let (inst, view) = small_fixture(5);
        let data = view.item_placement().unwrap();
        let sol = assignment_construct(&inst, &view, &HeuristicBudget::default(), &clock).unwrap();
        assert!(check_feasibility(&inst, &sol, 1e-6).unwrap().feasible);
        let big = detect_big_items(&view).unwrap();
        let assign = data.assignment_of(&sol.values);
        let front = super::first_stage_containers(data);
        for &i in &big {
            assert!(assign[i] < front, "big item {i} in container {}", assign[i]);
        }
    }

    #[test]
    fn two_container_reassign_is_monotone_over_iterations() {
        let clock = SimClock::new();
        let (inst, view) = small_fixture(6);
        let mut sol = greedy_construct(&inst, &view, &BTreeMap::new()).unwrap();
        let mut last = sol.objective;
        for _ in 0..5 {
            sol = two_container_reassign(&inst, &view, &sol, &HeuristicBudget::default(), &clock)
                .unwrap();
            assert!(sol.objective <= last + 1e-12);
            assert!(check_feasibility(&inst, &sol, 1e-6).unwrap().feasible);
            last = sol.objective;
        }
    }
}
