//! RINS: relaxation-induced neighborhood search.
//!
//! Fixes every binary on which the incumbent and the LP solution agree, then
//! solves the remaining sub-MIP warm-started from the incumbent. Only strict
//! improvements are returned.

use std::collections::BTreeMap;

use crate::bnb::solve_submip;
use crate::clock::Clock;
use crate::lp::LpOptions;
use crate::model::{MilpInstance, Solution};

use super::{HeuristicBudget, HeuristicError};

/// Default agreement tolerance on `|incumbent_j - lp_j|`.
pub const RINS_FIX_TOL: f64 = 1e-6;

/// RINS at the default agreement tolerance.
pub fn rins(
    inst: &MilpInstance,
    incumbent: &Solution,
    lp_sol: &[f64],
    budget: &HeuristicBudget,
    clock: &dyn Clock,
) -> Result<Option<Solution>, HeuristicError> {
    rins_with_tol(
        inst,
        incumbent,
        lp_sol,
        RINS_FIX_TOL,
        budget.submip_seconds,
        &LpOptions::default(),
        clock,
    )
}

pub fn rins_with_tol(
    inst: &MilpInstance,
    incumbent: &Solution,
    lp_sol: &[f64],
    fix_tol: f64,
    submip_seconds: f64,
    lp_opts: &LpOptions,
    clock: &dyn Clock,
) -> Result<Option<Solution>, HeuristicError> {
    let mut fixings = BTreeMap::new();
    for j in 0..inst.num_vars() {
        if inst.is_binary(j) && (incumbent.values[j] - lp_sol[j]).abs() <= fix_tol {
            fixings.insert(j, incumbent.values[j].round());
        }
    }
    let best = solve_submip(
        inst,
        &fixings,
        &[],
        &[],
        submip_seconds,
        lp_opts,
        clock,
        Some(incumbent),
    )?;
    Ok(best.filter(|s| s.objective < incumbent.objective - 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::SimClock;
    use crate::model::{Constraint, Sense};

    fn cover_instance() -> MilpInstance {
        // min x0 + x1 + 3 x2 s.t. x0 + x1 + x2 >= 2, binaries.
        MilpInstance::new(
            "cover",
            vec![1.0, 1.0, 3.0],
            vec![Constraint::new(
                vec![(0, 1.0), (1, 1.0), (2, 1.0)],
                Sense::Ge,
                2.0,
            )],
            vec![0.0; 3],
            vec![1.0; 3],
            vec![true; 3],
            vec!["a".into(), "b".into(), "c".into()],
            vec!["cov".into()],
        )
        .unwrap()
    }

    #[test]
    fn agreeing_guides_fix_everything_and_return_none() {
        let inst = cover_instance();
        let incumbent = Solution::new(&inst, vec![1.0, 1.0, 0.0]); // optimal
        let lp_sol = vec![1.0, 1.0, 0.0];
        let clock = SimClock::new();
        let out = rins(&inst, &incumbent, &lp_sol, &HeuristicBudget::default(), &clock).unwrap();
        assert!(out.is_none(), "no strict improvement exists");
    }

    #[test]
    fn improvement_is_found_when_the_neighborhood_contains_one() {
        let inst = cover_instance();
        // Suboptimal incumbent uses the expensive x2.
        let incumbent = Solution::new(&inst, vec![1.0, 0.0, 1.0]); // cost 4
        // LP solution agrees only on x0, leaving x1/x2 free.
        let lp_sol = vec![1.0, 0.6, 0.4];
        let clock = SimClock::new();
        let out = rins(&inst, &incumbent, &lp_sol, &HeuristicBudget::default(), &clock)
            .unwrap()
            .expect("better point exists in the neighborhood");
        assert_eq!(out.objective, 2.0);
    }

    #[test]
    fn empty_agreement_degenerates_to_full_problem_within_budget() {
        let inst = cover_instance();
        let incumbent = Solution::new(&inst, vec![1.0, 0.0, 1.0]);
        let lp_sol = vec![0.5, 0.5, 0.5];
        let clock = SimClock::new();
        let out = rins(&inst, &incumbent, &lp_sol, &HeuristicBudget::default(), &clock).unwrap();
        // Full problem optimum 2 < 4: improvement returned.
        assert_eq!(out.unwrap().objective, 2.0);
    }
}
