//! Workload apportionment heuristics: round-up warm start, model
//! tightening, and the adaptive quantile rounding loop.
//!
//! The tightened model couples capacities to activations
//! (`sum_i x_ij <= b_j y_j`) and, when every workload is below every
//! accessible capacity, drops the per-pair activation rows. Integer-`y`
//! points of the tightened model map back to original-feasible points by
//! capping each flow at its task's workload; `WorkloadData::repair_flows`
//! does exactly that.

use crate::clock::Clock;
use crate::generators::{StructuredView, WorkloadData};
use crate::lp::{solve_lp_opts, LpOptions, LpStatus};
use crate::metrics::{BnbEvent, EventKind};
use crate::model::{Constraint, MilpInstance, Sense, Solution};

use super::{HeuristicBudget, HeuristicError};

fn data_of(view: &StructuredView) -> Result<&WorkloadData, HeuristicError> {
    view.workload().ok_or(HeuristicError::WrongFamily {
        expected: "workload",
    })
}

/// Solves the LP relaxation and rounds every fractional `y` up; the LP flows
/// complete it. Rounding up only loosens the activation rows, so the result
/// is always feasible.
pub fn round_up_warm_start(
    inst: &MilpInstance,
    clock: &dyn Clock,
) -> Result<Solution, HeuristicError> {
    let lp = solve_lp_opts(&inst.lp_relaxation(), &LpOptions::default(), Some(clock));
    if lp.status != LpStatus::Optimal {
        return Err(HeuristicError::RootLpInfeasible);
    }
    let mut values = lp.x;
    for j in inst.integer_vars() {
        values[j] = if values[j] > 1e-9 { 1.0 } else { 0.0 };
    }
    Ok(Solution::new(inst, values))
}

/// Replaces the capacity rows by their activation-coupled form and, when
/// `a_i < b_j` holds for every accessible pair, drops the per-pair
/// activation rows they dominate. When the check fails the activation rows
/// are kept and only the capacity coupling is applied.
pub fn tighten_workload(
    inst: &MilpInstance,
    view: &StructuredView,
) -> Result<MilpInstance, HeuristicError> {
    let data = data_of(view)?;
    let dominated = data
        .access
        .iter()
        .enumerate()
        .all(|(i, set)| set.iter().all(|&j| data.workloads[i] < data.capacity[j]));

    let (act_s, act_e) = data.activation_rows;
    let (cap_s, cap_e) = data.capacity_rows;
    let mut rows = Vec::new();
    let mut names = Vec::new();
    for (r, con) in inst.constraints.iter().enumerate() {
        if r >= act_s && r < act_e {
            if !dominated {
                rows.push(con.clone());
                names.push(inst.con_names[r].clone());
            }
            continue;
        }
        if r >= cap_s && r < cap_e {
            let j = r - cap_s;
            let mut coeffs = con.coeffs.clone();
            coeffs.push((data.y_index(j), -data.capacity[j]));
            rows.push(Constraint::new(coeffs, Sense::Le, 0.0));
            names.push(format!("tcap_{j}"));
            continue;
        }
        rows.push(con.clone());
        names.push(inst.con_names[r].clone());
    }
    Ok(inst.with_constraints(rows, names)?)
}

/// Output of the adaptive rounding loop: the best solution found (in the
/// space of the instance it ran on) and the primal updates it generated,
/// with times relative to the loop start.
pub struct RoundingOutcome {
    pub best: Option<Solution>,
    pub fragment: Vec<BnbEvent>,
    /// Heuristic-internal lower bound on the machine count. Guides the
    /// bisection only: a failed rounding at value v does not prove that no
    /// v-machine solution exists, so this must never feed dual integrals.
    pub internal_bound: f64,
}

/// Adaptive quantile rounding: bisect on a target machine count `v` between
/// the primal and a heuristic dual bound, pick the rounding threshold as the
/// value of the v-th largest fractional `y`, and test each rounded pattern
/// by an LP over the flows. Every accepted incumbent is reported through
/// `on_incumbent`.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_rounding(
    inst: &MilpInstance,
    view: &StructuredView,
    budget: &HeuristicBudget,
    gap_epsilon: f64,
    initial_pb: Option<f64>,
    clock: &dyn Clock,
    mut on_incumbent: Option<&mut dyn FnMut(&Solution)>,
) -> Result<RoundingOutcome, HeuristicError> {
    let data = data_of(view)?;
    let t0 = clock.now();
    let deadline = t0 + budget.wall_seconds;
    let lp = solve_lp_opts(&inst.lp_relaxation(), &LpOptions::default(), Some(clock));
    if lp.status != LpStatus::Optimal {
        return Err(HeuristicError::RootLpInfeasible);
    }

    let machines = data.machines();
    let y_lp: Vec<f64> = (0..machines).map(|j| lp.x[data.y_index(j)]).collect();
    let ones: Vec<usize> = (0..machines).filter(|&j| y_lp[j] >= 1.0 - 1e-6).collect();
    let mut fractional: Vec<usize> = (0..machines)
        .filter(|&j| y_lp[j] > 1e-6 && y_lp[j] < 1.0 - 1e-6)
        .collect();
    // Descending by LP value, ties by index: the quantile order.
    fractional.sort_by(|&a, &b| y_lp[b].partial_cmp(&y_lp[a]).unwrap().then(a.cmp(&b)));

    let mut best: Option<Solution> = None;
    let mut fragment = Vec::new();
    let emit = |sol: &Solution,
                    fragment: &mut Vec<BnbEvent>,
                    on_incumbent: &mut Option<&mut dyn FnMut(&Solution)>,
                    t: f64| {
        fragment.push(BnbEvent {
            t,
            kind: EventKind::PrimalUpdate(sol.objective),
        });
        if let Some(cb) = on_incumbent.as_deref_mut() {
            cb(sol);
        }
    };

    // LP already integral: it is the incumbent, zero iterations.
    if fractional.is_empty() {
        let y_pattern: Vec<f64> = (0..machines)
            .map(|j| if y_lp[j] >= 1.0 - 1e-6 { 1.0 } else { 0.0 })
            .collect();
        if let Some(sol) = complete_pattern(inst, data, &y_pattern, clock) {
            emit(&sol, &mut fragment, &mut on_incumbent, clock.now() - t0);
            return Ok(RoundingOutcome {
                internal_bound: sol.objective,
                best: Some(sol),
                fragment,
            });
        }
    }

    let mut db = (lp.objective - 1e-9).ceil();
    let mut pb = initial_pb.unwrap_or(f64::INFINITY);

    // Round-up-all start when no incumbent was handed in.
    if !pb.is_finite() {
        let mut y_pattern = vec![0.0; machines];
        for &j in ones.iter().chain(&fractional) {
            y_pattern[j] = 1.0;
        }
        if let Some(sol) = complete_pattern(inst, data, &y_pattern, clock) {
            pb = sol.objective;
            emit(&sol, &mut fragment, &mut on_incumbent, clock.now() - t0);
            best = Some(sol);
        }
    }

    let mut iterations = 0;
    while pb - db > gap_epsilon && clock.now() < deadline && iterations < budget.max_iterations {
        iterations += 1;
        clock.charge(3.0);
        let v = ((pb + db) / 2.0).floor();
        let need = v as i64 - ones.len() as i64;
        if need < 0 || need > fractional.len() as i64 {
            // Unreachable target by rounding: treat as a failed probe.
            db = v + 1.0;
            continue;
        }
        let mut y_pattern = vec![0.0; machines];
        for &j in &ones {
            y_pattern[j] = 1.0;
        }
        for &j in fractional.iter().take(need as usize) {
            y_pattern[j] = 1.0;
        }
        match complete_pattern(inst, data, &y_pattern, clock) {
            Some(sol) if sol.objective < pb - 1e-9 => {
                pb = sol.objective;
                emit(&sol, &mut fragment, &mut on_incumbent, clock.now() - t0);
                best = Some(sol);
            }
            Some(_) => {
                // Completable but no improvement; steer the bisection up.
                db = (v + 1.0).min(pb);
            }
            None => db = v + 1.0,
        }
    }

    Ok(RoundingOutcome {
        best,
        fragment,
        internal_bound: db,
    })
}

/// Fixes the machine pattern and solves the flow LP; `None` when the
/// pattern admits no feasible apportionment.
fn complete_pattern(
    inst: &MilpInstance,
    data: &WorkloadData,
    y_pattern: &[f64],
    clock: &dyn Clock,
) -> Option<Solution> {
    let fixings: std::collections::BTreeMap<usize, f64> = (0..data.machines())
        .map(|j| (data.y_index(j), y_pattern[j]))
        .collect();
    let fixed = inst.fix_variables(&fixings).ok()?;
    let r = solve_lp_opts(&fixed.lp_relaxation(), &LpOptions::default(), Some(clock));
    if r.status != LpStatus::Optimal {
        return None;
    }
    let mut values = r.x;
    for j in 0..data.machines() {
        values[data.y_index(j)] = y_pattern[j];
    }
    Some(Solution::new(inst, values))
}
