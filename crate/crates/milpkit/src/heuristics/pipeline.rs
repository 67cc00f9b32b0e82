//! Family dispatch for the primal task.
//!
//! Each pipeline starts from the sidecar's trivial bound and emits a
//! non-increasing primal track; every incumbent is verified against the
//! original instance at 1e-6 before it enters the timeline. Instances
//! without a recognized view run the generic pipeline (feasibility pump,
//! then RINS guided by the LP solution).

use std::collections::BTreeMap;

use crate::clock::Clock;
use crate::generators::{recover_periods, Family, StructuredView};
use crate::lp::{solve_lp_opts, LpOptions, LpStatus};
use crate::metrics::{BoundsTimeline, EventKind};
use crate::model::{check_feasibility, MilpInstance, Solution};

use super::item_placement as ip;
use super::time_indexed as ti;
use super::workload as wl;
use super::{feasibility_pump, rins, HeuristicBudget};

pub struct PipelineOutput {
    pub timeline: BoundsTimeline,
    pub best: Option<Solution>,
}

/// Collects verified incumbents into the timeline.
struct Emitter<'a> {
    inst: &'a MilpInstance,
    clock: &'a dyn Clock,
    t0: f64,
    timeline: BoundsTimeline,
    best: Option<Solution>,
}

impl<'a> Emitter<'a> {
    fn bound(&self) -> f64 {
        self.best
            .as_ref()
            .map_or(self.timeline.initial_primal, |s| s.objective)
    }

    /// Accepts strictly improving, checker-feasible solutions.
    fn offer(&mut self, sol: &Solution) {
        if sol.objective >= self.bound() - 1e-9 {
            return;
        }
        match check_feasibility(self.inst, sol, 1e-6) {
            Ok(rep) if rep.feasible => {
                let t = (self.clock.now() - self.t0).min(self.timeline.horizon);
                self.timeline.push(t, EventKind::PrimalUpdate(sol.objective));
                self.best = Some(sol.clone());
            }
            _ => {}
        }
    }
}

/// Runs the family pipeline within `budget.wall_seconds` on the given
/// clock. The timeline horizon is the wall budget; its initial primal bound
/// is the sidecar's trivial bound when a view is present.
pub fn primal_pipeline(
    inst: &MilpInstance,
    view: Option<&StructuredView>,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> PipelineOutput {
    let initial = view.map_or(f64::INFINITY, |v| v.trivial_bound);
    let mut em = Emitter {
        inst,
        clock,
        t0: clock.now(),
        timeline: BoundsTimeline::new(budget.wall_seconds, initial, f64::NEG_INFINITY),
        best: None,
    };

    match view.map(|v| v.family) {
        Some(Family::ItemPlacement) => item_placement_pipeline(inst, view.unwrap(), budget, clock, &mut em),
        Some(Family::Workload) => workload_pipeline(inst, view.unwrap(), budget, clock, &mut em),
        Some(Family::TimeIndexed) => time_indexed_pipeline(inst, budget, clock, &mut em),
        None => generic_pipeline(inst, budget, clock, &mut em),
    }

    PipelineOutput {
        timeline: em.timeline,
        best: em.best,
    }
}

fn remaining(budget: &HeuristicBudget, em: &Emitter, clock: &dyn Clock) -> f64 {
    (em.t0 + budget.wall_seconds - clock.now()).max(0.0)
}

fn item_placement_pipeline(
    inst: &MilpInstance,
    view: &StructuredView,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
    em: &mut Emitter,
) {
    let fixings = ip::detect_big_items(view)
        .and_then(|big| ip::preplace_big_items(view, &big))
        .unwrap_or_default();
    let greedy = ip::greedy_construct(inst, view, &fixings)
        .or_else(|_| ip::greedy_construct(inst, view, &BTreeMap::new()));
    let Ok(greedy) = greedy else { return };
    em.offer(&greedy);

    let mut current = em.best.clone().unwrap_or(greedy);
    let swap_budget = HeuristicBudget {
        wall_seconds: remaining(budget, em, clock) * 0.25,
        ..budget.clone()
    };
    if let Ok(sol) = ip::swap_improve(inst, view, &current, &swap_budget, clock) {
        em.offer(&sol);
        current = em.best.clone().unwrap_or(current);
    }

    if remaining(budget, em, clock) > budget.submip_seconds {
        if let Ok(sol) = ip::assignment_construct(inst, view, budget, clock) {
            em.offer(&sol);
            current = em.best.clone().unwrap_or(current);
        }
    }

    // Pairwise reassignment until it stalls or the budget runs out.
    for _ in 0..budget.max_iterations {
        if remaining(budget, em, clock) <= 0.0 {
            break;
        }
        match ip::two_container_reassign(inst, view, &current, budget, clock) {
            Ok(sol) if sol.objective < current.objective - 1e-9 => {
                em.offer(&sol);
                current = sol;
            }
            _ => break,
        }
    }
}

fn workload_pipeline(
    inst: &MilpInstance,
    view: &StructuredView,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
    em: &mut Emitter,
) {
    let Some(data) = view.workload() else { return };
    let Ok(warm) = wl::round_up_warm_start(inst, clock) else {
        return;
    };
    em.offer(&warm);

    let Ok(tight) = wl::tighten_workload(inst, view) else {
        return;
    };

    // Adaptive rounding runs on the tightened model; its incumbents are
    // repaired (flows capped at the workloads) before entering the timeline.
    let rounding_budget = HeuristicBudget {
        wall_seconds: remaining(budget, em, clock) * 0.5,
        ..budget.clone()
    };
    let initial_pb = em.best.as_ref().map(|s| s.objective);
    let mut repair_and_offer = |sol: &Solution| {
        let repaired = data.repair_flows(inst, &sol.values);
        em.offer(&repaired);
    };
    let rounded = wl::adaptive_rounding(
        &tight,
        view,
        &rounding_budget,
        0.0,
        initial_pb,
        clock,
        Some(&mut repair_and_offer),
    );
    let _ = rounded;

    // RINS on the tightened model, guided by its LP solution and the
    // current incumbent (original-feasible points stay feasible there).
    if let Some(inc) = em.best.clone() {
        if remaining(budget, em, clock) > 0.0 {
            let lp = solve_lp_opts(&tight.lp_relaxation(), &LpOptions::default(), Some(clock));
            if lp.status == LpStatus::Optimal {
                if let Ok(Some(sol)) = rins(&tight, &inc, &lp.x, budget, clock) {
                    let repaired = data.repair_flows(inst, &sol.values);
                    em.offer(&repaired);
                }
            }
        }
    }
}

fn time_indexed_pipeline(
    inst: &MilpInstance,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
    em: &mut Emitter,
) {
    let recovery = recover_periods(inst);
    let periods = recovery.periods;
    let horizon = periods.iter().flatten().copied().max().unwrap_or(1);

    // First solutions from the pump; the all-lower-bounds point backs it up
    // on this family.
    let pump_budget = HeuristicBudget {
        wall_seconds: remaining(budget, em, clock) * 0.2,
        ..budget.clone()
    };
    if let Some(sol) = feasibility_pump(inst, &pump_budget, clock) {
        em.offer(&sol);
    }
    if em.best.is_none() {
        let lows = Solution::new(inst, inst.lower.clone());
        em.offer(&lows);
        if em.best.is_none() {
            return;
        }
    }
    let mut current = em.best.clone().unwrap();

    if let Ok(Some(sol)) = ti::rens(inst, &periods, &current, budget, clock) {
        em.offer(&sol);
        current = em.best.clone().unwrap_or(current);
    }

    let rh_budget = HeuristicBudget {
        wall_seconds: remaining(budget, em, clock),
        ..budget.clone()
    };
    let mut offer = |sol: &Solution| em.offer(sol);
    let _ = ti::rolling_horizon(
        inst,
        &periods,
        ti::HorizonSchedule::new(horizon, 5),
        &rh_budget,
        &current,
        clock,
        Some(&mut offer),
    );
}

fn generic_pipeline(
    inst: &MilpInstance,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
    em: &mut Emitter,
) {
    let pump_budget = HeuristicBudget {
        wall_seconds: remaining(budget, em, clock) * 0.4,
        ..budget.clone()
    };
    if let Some(sol) = feasibility_pump(inst, &pump_budget, clock) {
        em.offer(&sol);
    }
    let Some(inc) = em.best.clone() else { return };
    let lp = solve_lp_opts(&inst.lp_relaxation(), &LpOptions::default(), Some(clock));
    if lp.status == LpStatus::Optimal {
        if let Ok(Some(sol)) = rins(inst, &inc, &lp.x, budget, clock) {
            em.offer(&sol);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::SimClock;
    use crate::generators::{
        gen_item_placement, gen_time_indexed, gen_workload, ItemPlacementParams,
        TimeIndexedParams, WorkloadParams,
    };

    fn assert_pipeline_contract(inst: &MilpInstance, view: &StructuredView) {
        let clock = SimClock::new();
        let out = primal_pipeline(inst, Some(view), &HeuristicBudget::default(), &clock);
        // Track starts at the trivial bound and never increases.
        assert_eq!(out.timeline.initial_primal, view.trivial_bound);
        let mut pb = out.timeline.initial_primal;
        for e in &out.timeline.events {
            if let EventKind::PrimalUpdate(v) = e.kind {
                assert!(v <= pb, "primal track increased");
                pb = v;
            }
        }
        assert!(pb <= view.trivial_bound + 1e-9);
        if let Some(best) = &out.best {
            assert!(check_feasibility(inst, best, 1e-6).unwrap().feasible);
            assert_eq!(best.objective, out.timeline.final_primal());
        }
    }

    #[test]
    fn item_placement_pipeline_contract() {
        for seed in 0..4 {
            let (inst, view) =
                gen_item_placement(&ItemPlacementParams::small(12, 4, seed)).unwrap();
            assert_pipeline_contract(&inst, &view);
        }
    }

    #[test]
    fn workload_pipeline_contract() {
        for seed in 0..4 {
            let (inst, view) = gen_workload(&WorkloadParams::small(10, 6, seed)).unwrap();
            assert_pipeline_contract(&inst, &view);
        }
    }

    #[test]
    fn time_indexed_pipeline_contract() {
        for seed in 0..4 {
            let (inst, view) = gen_time_indexed(&TimeIndexedParams::small(6, 3, seed)).unwrap();
            assert_pipeline_contract(&inst, &view);
        }
    }

    #[test]
    fn unknown_family_runs_the_generic_pipeline() {
        let inst = crate::bnb::tests::knapsack3();
        let clock = SimClock::new();
        let out = primal_pipeline(&inst, None, &HeuristicBudget::default(), &clock);
        // The pump finds something on this tiny knapsack.
        assert!(out.best.is_some());
    }
}
