//! MILP instance representation, solution evaluation, and instance
//! transformations (fixing, relaxing, constraint editing).
//!
//! Everything downstream exchanges [`MilpInstance`] values: generators emit
//! them, the LP solver relaxes them, branch and bound restricts them, and the
//! heuristics edit them. Instances are immutable after construction; every
//! transformation returns a new instance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row sense of a linear constraint. Minimization only; senses are kept as
/// written rather than normalized to `<=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// One sparse constraint row `a * x (sense) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Sparse coefficients as (variable index, value) pairs, index-sorted.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(mut coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        coeffs.sort_by_key(|&(j, _)| j);
        Constraint { coeffs, sense, rhs }
    }

    /// Left-hand side value at `x`.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Signed violation at `x`: positive means the row is broken by that much.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("variable index {index} out of range (n = {n})")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("duplicate variable index {index} in constraint {row}")]
    DuplicateIndex { row: usize, index: usize },
    #[error("variable {index}: lower bound {lo} exceeds upper bound {hi}")]
    BoundOrder { index: usize, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fixing variable {index} to {value} outside bounds [{lo}, {hi}]")]
    FixOutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("fixing integer variable {index} to fractional value {value}")]
    FractionalFix { index: usize, value: f64 },
}

/// A minimization MILP: `min c*x` subject to sparse rows, variable bounds,
/// and per-variable integrality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpInstance {
    pub name: String,
    /// Objective coefficients, dense over all variables.
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable lower bounds; `f64::NEG_INFINITY` allowed.
    pub lower: Vec<f64>,
    /// Per-variable upper bounds; `f64::INFINITY` allowed.
    pub upper: Vec<f64>,
    /// Integrality flag per variable. Generators emit integer variables
    /// first, but transformed instances may interleave.
    pub is_integer: Vec<bool>,
    pub var_names: Vec<String>,
    pub con_names: Vec<String>,
}

impl MilpInstance {
    /// Validating constructor. Checks index ranges, duplicate indices within
    /// a row, and bound ordering.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        objective: Vec<f64>,
        constraints: Vec<Constraint>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        is_integer: Vec<bool>,
        var_names: Vec<String>,
        con_names: Vec<String>,
    ) -> Result<Self, ModelError> {
        let n = objective.len();
        for v in [lower.len(), upper.len(), is_integer.len(), var_names.len()] {
            if v != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: v });
            }
        }
        if con_names.len() != constraints.len() {
            return Err(ModelError::DimensionMismatch {
                expected: constraints.len(),
                got: con_names.len(),
            });
        }
        for (row, con) in constraints.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(j, _) in &con.coeffs {
                if j >= n {
                    return Err(ModelError::IndexOutOfRange { index: j, n });
                }
                if prev == Some(j) {
                    return Err(ModelError::DuplicateIndex { row, index: j });
                }
                prev = Some(j);
            }
        }
        for j in 0..n {
            if lower[j] > upper[j] {
                return Err(ModelError::BoundOrder {
                    index: j,
                    lo: lower[j],
                    hi: upper[j],
                });
            }
        }
        Ok(MilpInstance {
            name: name.into(),
            objective,
            constraints,
            lower,
            upper,
            is_integer,
            var_names,
            con_names,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Count of integer-constrained variables.
    pub fn num_int(&self) -> usize {
        self.is_integer.iter().filter(|&&b| b).count()
    }

    /// Indices of integer-constrained variables, ascending.
    pub fn integer_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.is_integer
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| j)
    }

    pub fn is_binary(&self, j: usize) -> bool {
        self.is_integer[j] && self.lower[j] == 0.0 && self.upper[j] == 1.0
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// True when every integer variable has finite bounds; the branch and
    /// bound solver rejects instances where this fails.
    pub fn integers_bounded(&self) -> bool {
        self.integer_vars()
            .all(|j| self.lower[j].is_finite() && self.upper[j].is_finite())
    }

    /// Returns a copy with `lo = hi = value` for every fixed variable.
    /// Integer variables must be fixed to integral values within bounds.
    pub fn fix_variables(&self, fixings: &BTreeMap<usize, f64>) -> Result<Self, ModelError> {
        let n = self.num_vars();
        let mut out = self.clone();
        for (&j, &v) in fixings {
            if j >= n {
                return Err(ModelError::IndexOutOfRange { index: j, n });
            }
            if v < self.lower[j] - 1e-9 || v > self.upper[j] + 1e-9 {
                return Err(ModelError::FixOutOfBounds {
                    index: j,
                    value: v,
                    lo: self.lower[j],
                    hi: self.upper[j],
                });
            }
            let v = if self.is_integer[j] {
                if (v - v.round()).abs() > 1e-9 {
                    return Err(ModelError::FractionalFix { index: j, value: v });
                }
                v.round()
            } else {
                v
            };
            out.lower[j] = v;
            out.upper[j] = v;
        }
        Ok(out)
    }

    /// Returns a copy with integrality dropped on the given variables.
    /// Relaxing a variable that is already continuous is a no-op.
    pub fn relax_integrality(&self, vars: &[usize]) -> Result<Self, ModelError> {
        let n = self.num_vars();
        let mut out = self.clone();
        for &j in vars {
            if j >= n {
                return Err(ModelError::IndexOutOfRange { index: j, n });
            }
            out.is_integer[j] = false;
        }
        Ok(out)
    }

    /// The LP relaxation: all integrality dropped.
    pub fn lp_relaxation(&self) -> Self {
        let mut out = self.clone();
        out.is_integer.iter_mut().for_each(|b| *b = false);
        out
    }

    /// Returns a copy with the constraint set replaced. Used by heuristics
    /// that tighten, drop, or re-sense rows.
    pub fn with_constraints(
        &self,
        constraints: Vec<Constraint>,
        con_names: Vec<String>,
    ) -> Result<Self, ModelError> {
        MilpInstance::new(
            self.name.clone(),
            self.objective.clone(),
            constraints,
            self.lower.clone(),
            self.upper.clone(),
            self.is_integer.clone(),
            self.var_names.clone(),
            con_names,
        )
    }
}

/// A point in variable space with its cached objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub values: Vec<f64>,
    pub objective: f64,
}

impl Solution {
    pub fn new(inst: &MilpInstance, values: Vec<f64>) -> Self {
        let objective = inst.objective_value(&values);
        Solution { values, objective }
    }
}

/// Outcome of a feasibility check at a given tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub worst_constraint_violation: f64,
    pub worst_integrality_violation: f64,
    pub worst_bound_violation: f64,
}

/// Checks `sol` against all rows, bounds, and integralities of `inst`.
/// `feasible` holds exactly when all three worst violations are within `tol`.
pub fn check_feasibility(
    inst: &MilpInstance,
    sol: &Solution,
    tol: f64,
) -> Result<FeasibilityReport, ModelError> {
    if sol.values.len() != inst.num_vars() {
        return Err(ModelError::DimensionMismatch {
            expected: inst.num_vars(),
            got: sol.values.len(),
        });
    }
    let x = &sol.values;
    let mut worst_con = 0.0_f64;
    for con in &inst.constraints {
        worst_con = worst_con.max(con.violation(x));
    }
    let mut worst_int = 0.0_f64;
    for j in inst.integer_vars() {
        worst_int = worst_int.max((x[j] - x[j].round()).abs());
    }
    let mut worst_bound = 0.0_f64;
    for j in 0..inst.num_vars() {
        if inst.lower[j].is_finite() {
            worst_bound = worst_bound.max(inst.lower[j] - x[j]);
        }
        if inst.upper[j].is_finite() {
            worst_bound = worst_bound.max(x[j] - inst.upper[j]);
        }
    }
    Ok(FeasibilityReport {
        feasible: worst_con <= tol && worst_int <= tol && worst_bound <= tol,
        worst_constraint_violation: worst_con,
        worst_integrality_violation: worst_int,
        worst_bound_violation: worst_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_instance() -> MilpInstance {
        // min x1 + x2 s.t. 2 x1 <= 4, x1 + x2 <= 1, x binary
        MilpInstance::new(
            "t",
            vec![1.0, 1.0],
            vec![
                Constraint::new(vec![(0, 2.0)], Sense::Le, 4.0),
                Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0),
            ],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![true, true],
            vec!["x1".into(), "x2".into()],
            vec!["c1".into(), "c2".into()],
        )
        .unwrap()
    }

    #[test]
    fn origin_is_feasible_when_rhs_nonnegative() {
        let inst = two_var_instance();
        let sol = Solution::new(&inst, vec![0.0, 0.0]);
        let rep = check_feasibility(&inst, &sol, 1e-9).unwrap();
        assert!(rep.feasible);
        assert_eq!(rep.worst_constraint_violation, 0.0);
        assert_eq!(rep.worst_integrality_violation, 0.0);
        assert_eq!(rep.worst_bound_violation, 0.0);
    }

    #[test]
    fn constraint_violation_is_signed_slack_deficit() {
        // x = 3 violates 2x <= 4 by 2.
        let inst = MilpInstance::new(
            "t",
            vec![1.0],
            vec![Constraint::new(vec![(0, 2.0)], Sense::Le, 4.0)],
            vec![0.0],
            vec![10.0],
            vec![false],
            vec!["x".into()],
            vec!["c".into()],
        )
        .unwrap();
        let sol = Solution::new(&inst, vec![3.0]);
        let rep = check_feasibility(&inst, &sol, 1e-9).unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.worst_constraint_violation, 2.0);
    }

    #[test]
    fn feasibility_monotone_in_tolerance() {
        let inst = two_var_instance();
        let sol = Solution::new(&inst, vec![0.9, 0.0]);
        let r1 = check_feasibility(&inst, &sol, 0.05).unwrap();
        let r2 = check_feasibility(&inst, &sol, 0.2).unwrap();
        assert!(!r1.feasible);
        assert!(r2.feasible);
    }

    #[test]
    fn fix_nothing_is_identity() {
        let inst = two_var_instance();
        let fixed = inst.fix_variables(&BTreeMap::new()).unwrap();
        assert_eq!(inst, fixed);
    }

    #[test]
    fn fix_sets_both_bounds() {
        let inst = two_var_instance();
        let fixed = inst.fix_variables(&BTreeMap::from([(0, 1.0)])).unwrap();
        assert_eq!(fixed.lower[0], 1.0);
        assert_eq!(fixed.upper[0], 1.0);
        assert_eq!(fixed.lower[1], 0.0);
        assert_eq!(fixed.constraints, inst.constraints);
    }

    #[test]
    fn fix_rejects_out_of_bounds_and_fractional() {
        let inst = two_var_instance();
        assert!(matches!(
            inst.fix_variables(&BTreeMap::from([(0, 2.0)])),
            Err(ModelError::FixOutOfBounds { .. })
        ));
        assert!(matches!(
            inst.fix_variables(&BTreeMap::from([(0, 0.5)])),
            Err(ModelError::FractionalFix { .. })
        ));
    }

    #[test]
    fn relax_empty_is_identity_and_all_clears_p() {
        let inst = two_var_instance();
        assert_eq!(inst.relax_integrality(&[]).unwrap(), inst);
        let relaxed = inst.relax_integrality(&[0, 1]).unwrap();
        assert_eq!(relaxed.num_int(), 0);
        assert_eq!(relaxed, inst.lp_relaxation());
        assert!(matches!(
            inst.relax_integrality(&[7]),
            Err(ModelError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn fix_and_relax_commute() {
        let inst = two_var_instance();
        let fixings = BTreeMap::from([(0, 1.0)]);
        let a = inst
            .fix_variables(&fixings)
            .unwrap()
            .relax_integrality(&[1])
            .unwrap();
        let b = inst
            .relax_integrality(&[1])
            .unwrap()
            .fix_variables(&fixings)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constructor_rejects_bad_rows() {
        let bad_index = MilpInstance::new(
            "t",
            vec![1.0],
            vec![Constraint::new(vec![(3, 1.0)], Sense::Le, 1.0)],
            vec![0.0],
            vec![1.0],
            vec![false],
            vec!["x".into()],
            vec!["c".into()],
        );
        assert!(matches!(bad_index, Err(ModelError::IndexOutOfRange { .. })));

        let dup = MilpInstance::new(
            "t",
            vec![1.0],
            vec![Constraint::new(vec![(0, 1.0), (0, 2.0)], Sense::Le, 1.0)],
            vec![0.0],
            vec![1.0],
            vec![false],
            vec!["x".into()],
            vec!["c".into()],
        );
        assert!(matches!(dup, Err(ModelError::DuplicateIndex { .. })));

        let bounds = MilpInstance::new(
            "t",
            vec![1.0],
            vec![],
            vec![2.0],
            vec![1.0],
            vec![false],
            vec!["x".into()],
            vec![],
        );
        assert!(matches!(bounds, Err(ModelError::BoundOrder { .. })));
    }

    #[test]
    fn solution_objective_cache_matches_recompute() {
        let inst = two_var_instance();
        let sol = Solution::new(&inst, vec![1.0, 0.0]);
        let recomputed = inst.objective_value(&sol.values);
        assert!((sol.objective - recomputed).abs() <= 1e-9 * (1.0 + recomputed.abs()));
    }
}
