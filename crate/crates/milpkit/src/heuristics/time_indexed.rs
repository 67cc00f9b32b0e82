//! Time-indexed heuristics: RENS over the horizon tail and the
//! rolling-horizon method.
//!
//! Both work from recovered period labels. RENS fixes every discrete
//! variable below 90% of the horizon at the incumbent and frees the tail;
//! rolling horizon sweeps a window over the periods, fixing the past,
//! keeping integrality inside the window, relaxing the near future, and
//! dropping constraints of the far future.

use std::collections::BTreeMap;

use crate::bnb::solve_submip;
use crate::clock::Clock;
use crate::lp::LpOptions;
use crate::metrics::{BnbEvent, EventKind};
use crate::model::{check_feasibility, MilpInstance, Solution};

use super::{HeuristicBudget, HeuristicError};

/// Fraction of the horizon that RENS fixes at the incumbent.
pub const RENS_FIX_FRACTION: f64 = 0.9;

/// Sub-MIP fixing discrete variables with periods below `0.9 * H` at the
/// guide; returns an improvement or `None`.
pub fn rens(
    inst: &MilpInstance,
    periods: &[Option<u32>],
    guide: &Solution,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> Result<Option<Solution>, HeuristicError> {
    if !check_feasibility(inst, guide, 1e-6)?.feasible {
        return Err(HeuristicError::InfeasibleInput);
    }
    let horizon = periods.iter().flatten().copied().max().unwrap_or(1) as f64;
    let cut = RENS_FIX_FRACTION * horizon;
    let mut fixings = BTreeMap::new();
    for j in inst.integer_vars() {
        if let Some(h) = periods[j] {
            if (h as f64) < cut {
                fixings.insert(j, guide.values[j].round());
            }
        }
    }
    let best = solve_submip(
        inst,
        &fixings,
        &[],
        &[],
        budget.submip_seconds,
        &LpOptions::default(),
        clock,
        Some(guide),
    )?;
    Ok(best.filter(|s| s.objective < guide.objective - 1e-9))
}

/// Moving frontiers of the rolling-horizon sweep: variables with periods
/// below `fix` are pinned to the previous solution, integrality is kept up
/// to `relax`, and constraints touching periods beyond `ignore` are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonSchedule {
    pub fix: u32,
    pub relax: u32,
    pub ignore: u32,
    pub delta: u32,
    pub horizon: u32,
}

impl HorizonSchedule {
    /// Initial frontiers for a horizon of `h` periods, advancing by
    /// `ceil(h / divisor)` per iteration. The first window fixes nothing:
    /// with `delta >= h` a single iteration solves the full problem.
    pub fn new(h: u32, divisor: u32) -> Self {
        let delta = h.div_ceil(divisor.max(1)).max(1);
        HorizonSchedule {
            fix: 0,
            relax: delta.min(h),
            ignore: (2 * delta).min(h),
            delta,
            horizon: h,
        }
    }

    pub fn valid(&self) -> bool {
        self.fix <= self.relax && self.relax <= self.ignore && self.ignore <= self.horizon
    }

    fn advance(&mut self) {
        self.fix = (self.fix + self.delta).min(self.horizon);
        self.relax = (self.fix + self.delta).min(self.horizon);
        self.ignore = (self.fix + 2 * self.delta).min(self.horizon);
    }

    /// One-off widening used when a window turns out infeasible.
    fn widened(&self) -> Self {
        let mut w = *self;
        w.relax = (w.fix + 2 * w.delta).min(w.horizon);
        w.ignore = (w.fix + 4 * w.delta).min(w.horizon);
        w
    }
}

pub struct RollingOutcome {
    pub best: Solution,
    pub fragment: Vec<BnbEvent>,
}

/// Rolling-horizon sweep. `warm` must be feasible in the full instance; the
/// final result is always checked against the full instance with every
/// dropped constraint reinstated, and `warm` is returned when no window
/// produced anything better.
#[allow(clippy::too_many_arguments)]
pub fn rolling_horizon(
    inst: &MilpInstance,
    periods: &[Option<u32>],
    schedule: HorizonSchedule,
    budget: &HeuristicBudget,
    warm: &Solution,
    clock: &dyn Clock,
    mut on_incumbent: Option<&mut dyn FnMut(&Solution)>,
) -> Result<RollingOutcome, HeuristicError> {
    if !schedule.valid() {
        return Err(HeuristicError::WrongFamily {
            expected: "valid horizon schedule",
        });
    }
    if !check_feasibility(inst, warm, 1e-6)?.feasible {
        return Err(HeuristicError::InfeasibleInput);
    }
    let t0 = clock.now();
    let deadline = t0 + budget.wall_seconds;
    let mut sched = schedule;
    let mut best = warm.clone();
    let mut prev = warm.clone();
    let mut fragment = Vec::new();

    loop {
        if clock.now() >= deadline {
            break;
        }
        let sub = match solve_window(inst, periods, &sched, &prev, budget, clock)? {
            Some(s) => Some(s),
            None => {
                // Widen once (doubled increments for this iteration only).
                let wide = sched.widened();
                solve_window(inst, periods, &wide, &prev, budget, clock)?
            }
        };
        let Some(sub) = sub else {
            break; // still infeasible: return best so far
        };

        // Candidate full-space point: integral part from the window, the
        // untouched future from the previous sweep.
        let mut values = prev.values.clone();
        for j in 0..inst.num_vars() {
            let keep_from_sub = match periods[j] {
                Some(h) => h <= sched.relax,
                None => true,
            };
            if keep_from_sub {
                values[j] = if inst.is_integer[j] {
                    sub.values[j].round()
                } else {
                    sub.values[j]
                };
            }
        }
        let candidate = Solution::new(inst, values);
        if check_feasibility(inst, &candidate, 1e-6)?.feasible {
            if candidate.objective < best.objective - 1e-9 {
                fragment.push(BnbEvent {
                    t: clock.now() - t0,
                    kind: EventKind::PrimalUpdate(candidate.objective),
                });
                if let Some(cb) = on_incumbent.as_deref_mut() {
                    cb(&candidate);
                }
                best = candidate.clone();
            }
            prev = candidate;
        } else {
            // Keep the window solution as the fixing source; it satisfies
            // every kept row even when the spliced point does not.
            prev = Solution::new(inst, sub.values);
        }

        sched.advance();
        if sched.fix >= sched.horizon {
            break;
        }
    }

    debug_assert!(check_feasibility(inst, &best, 1e-6)?.feasible);
    Ok(RollingOutcome { best, fragment })
}

/// One window: drop rows touching periods beyond `ignore`, relax
/// integrality beyond `relax`, fix below `fix` at `prev`, solve.
fn solve_window(
    inst: &MilpInstance,
    periods: &[Option<u32>],
    sched: &HorizonSchedule,
    prev: &Solution,
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> Result<Option<Solution>, HeuristicError> {
    let mut fixings = BTreeMap::new();
    let mut relaxations = Vec::new();
    for j in inst.integer_vars() {
        match periods[j] {
            Some(h) if h < sched.fix => {
                fixings.insert(j, prev.values[j].round());
            }
            Some(h) if h > sched.relax => relaxations.push(j),
            _ => {}
        }
    }
    let dropped: Vec<usize> = inst
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, con)| {
            con.coeffs
                .iter()
                .any(|&(j, _)| matches!(periods[j], Some(h) if h > sched.ignore))
        })
        .map(|(r, _)| r)
        .collect();

    // The previous point stays feasible in the window model (fixed at its
    // own values, rows are a subset), so it warm-starts the sub-MIP.
    Ok(solve_submip(
        inst,
        &fixings,
        &relaxations,
        &dropped,
        budget.submip_seconds,
        &LpOptions::default(),
        clock,
        Some(prev),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::SimClock;
    use crate::generators::{gen_time_indexed, recover_periods, TimeIndexedParams};

    fn fixture(seed: u64) -> (MilpInstance, Vec<Option<u32>>, Solution) {
        let (inst, _) = gen_time_indexed(&TimeIndexedParams::small(6, 3, seed)).unwrap();
        let rec = recover_periods(&inst);
        let warm = Solution::new(&inst, inst.lower.clone());
        (inst, rec.periods, warm)
    }

    #[test]
    fn rens_fix_set_respects_the_ninety_percent_rule() {
        // Horizon 10: periods 1..=8 fixed, 9 and 10 free.
        let periods: Vec<Option<u32>> = (1..=10).map(Some).collect();
        let horizon = 10.0;
        let cut = RENS_FIX_FRACTION * horizon;
        let fixed: Vec<u32> = periods
            .iter()
            .flatten()
            .filter(|&&h| (h as f64) < cut)
            .copied()
            .collect();
        assert_eq!(fixed, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn rens_improves_or_returns_none_and_never_regresses() {
        let clock = SimClock::new();
        for seed in 0..8 {
            let (inst, periods, warm) = fixture(seed);
            let out = rens(&inst, &periods, &warm, &HeuristicBudget::default(), &clock).unwrap();
            if let Some(sol) = out {
                assert!(sol.objective < warm.objective - 1e-9);
                assert!(check_feasibility(&inst, &sol, 1e-6).unwrap().feasible);
            }
        }
    }

    #[test]
    fn schedule_frontier_sequence_matches_the_arithmetic() {
        let mut s = HorizonSchedule::new(8, 4); // delta = 2
        assert_eq!(s.fix, 0);
        let mut fixes = Vec::new();
        loop {
            s.advance();
            fixes.push(s.fix);
            assert!(s.valid());
            if s.fix >= s.horizon {
                break;
            }
        }
        assert_eq!(fixes, vec![2, 4, 6, 8]);
    }

    #[test]
    fn degenerate_schedule_solves_the_full_problem() {
        let clock = SimClock::new();
        let (inst, periods, warm) = fixture(3);
        // delta >= H: single window covering everything.
        let sched = HorizonSchedule::new(6, 1);
        assert_eq!(sched.fix, 0);
        assert_eq!(sched.relax, 6);
        let out = rolling_horizon(
            &inst,
            &periods,
            sched,
            &HeuristicBudget::default(),
            &warm,
            &clock,
            None,
        )
        .unwrap();
        assert!(check_feasibility(&inst, &out.best, 1e-6).unwrap().feasible);
        // Single full-width window equals a plain budgeted solve.
        let direct = crate::bnb::solve_submip(
            &inst,
            &BTreeMap::new(),
            &[],
            &[],
            HeuristicBudget::default().submip_seconds,
            &LpOptions::default(),
            &SimClock::new(),
            Some(&warm),
        )
        .unwrap()
        .unwrap();
        assert_eq!(out.best.objective, direct.objective);
    }

    #[test]
    fn final_solutions_feasible_with_all_constraints_reinstated() {
        let clock = SimClock::new();
        for seed in 0..10 {
            let (inst, periods, warm) = fixture(seed + 50);
            let h = periods.iter().flatten().copied().max().unwrap();
            let out = rolling_horizon(
                &inst,
                &periods,
                HorizonSchedule::new(h, 5),
                &HeuristicBudget::default(),
                &warm,
                &clock,
                None,
            )
            .unwrap();
            assert!(
                check_feasibility(&inst, &out.best, 1e-6).unwrap().feasible,
                "seed {}",
                seed + 50
            );
            assert!(out.best.objective <= warm.objective + 1e-12);
        }
    }
}
