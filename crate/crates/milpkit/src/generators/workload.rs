//! Workload apportionment generator.
//!
//! Tasks spread their load over accessible machines; the apportionment must
//! survive the failure of any single machine, and the objective counts open
//! machines. Rows, in order: per-pair activation `x_ij <= a_i y_j`, machine
//! capacities, then one robustness row per (task, failing machine) pair.
//! Capacities are drawn strictly above every workload so the tightening
//! step may drop the activation rows.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lp::{solve_lp, LpStatus};
use crate::model::{Constraint, MilpInstance, Sense, Solution};

use super::{enumerate_small_optimum, Family, FamilyData, GeneratorError, StructuredView, VarRole};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadParams {
    pub tasks: usize,
    pub machines: usize,
    /// Fraction of machines accessible to each task; every access set has at
    /// least two machines.
    pub density: f64,
    /// Workloads `a_i` are drawn uniformly from this range.
    pub workload_range: (f64, f64),
    /// Capacities `b_j` are drawn uniformly from this range; the lower end
    /// must exceed the upper workload end.
    pub capacity_range: (f64, f64),
    pub seed: u64,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            tasks: 30,
            machines: 12,
            density: 0.5,
            workload_range: (1.0, 2.0),
            capacity_range: (5.0, 7.0),
            seed: 0,
        }
    }
}

impl WorkloadParams {
    pub fn small(tasks: usize, machines: usize, seed: u64) -> Self {
        WorkloadParams {
            tasks,
            machines,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidParams(m.to_string()));
        if self.tasks == 0 || self.machines < 2 {
            return bad("need at least one task and two machines");
        }
        if !(0.0..=1.0).contains(&self.density) || self.density <= 0.0 {
            return bad("density must lie in (0, 1]");
        }
        if self.workload_range.0 <= 0.0 || self.workload_range.0 > self.workload_range.1 {
            return bad("workload range must be positive and ordered");
        }
        if self.capacity_range.0 <= self.workload_range.1 {
            return bad("min capacity must exceed max workload (a_i < b_j)");
        }
        if self.capacity_range.0 > self.capacity_range.1 {
            return bad("capacity range must be ordered");
        }
        Ok(())
    }
}

/// Realized instance data plus the row layout the tightening step edits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadData {
    pub params: WorkloadParams,
    /// Workload `a_i` per task.
    pub workloads: Vec<f64>,
    /// Capacity `b_j` per machine.
    pub capacity: Vec<f64>,
    /// Accessible machines `N^i` per task, ascending.
    pub access: Vec<Vec<usize>>,
    /// Flow variable pairs `(task, machine)` in variable order, offset by
    /// `machines`.
    pub pairs: Vec<(usize, usize)>,
    /// Row ranges: activation rows (9), capacity rows (10), robustness (11).
    pub activation_rows: (usize, usize),
    pub capacity_rows: (usize, usize),
    pub robust_rows: (usize, usize),
}

impl WorkloadData {
    pub fn machines(&self) -> usize {
        self.capacity.len()
    }

    pub fn tasks(&self) -> usize {
        self.workloads.len()
    }

    pub fn y_index(&self, machine: usize) -> usize {
        machine
    }

    /// Index of flow variable `x_ij`; the pair must exist.
    pub fn x_index(&self, task: usize, machine: usize) -> Option<usize> {
        self.pairs
            .binary_search(&(task, machine))
            .ok()
            .map(|k| self.machines() + k)
    }

    /// Caps flows at `a_i` (activation repair): any point feasible in the
    /// tightened model maps to a point feasible in the original model with
    /// the same objective value.
    pub fn repair_flows(&self, inst: &MilpInstance, values: &[f64]) -> Solution {
        let mut v = values.to_vec();
        for (k, &(task, _)) in self.pairs.iter().enumerate() {
            let idx = self.machines() + k;
            v[idx] = v[idx].min(self.workloads[task]);
        }
        Solution::new(inst, v)
    }
}

const MAX_ATTEMPTS: usize = 20;

pub fn gen_workload(p: &WorkloadParams) -> Result<(MilpInstance, StructuredView), GeneratorError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x9e3779b97f4a7c15);

    for _attempt in 0..MAX_ATTEMPTS {
        let workloads: Vec<f64> = (0..p.tasks)
            .map(|_| rng.gen_range(p.workload_range.0..=p.workload_range.1))
            .collect();
        let capacity: Vec<f64> = (0..p.machines)
            .map(|_| rng.gen_range(p.capacity_range.0..=p.capacity_range.1))
            .collect();
        let set_size = ((p.density * p.machines as f64).round() as usize)
            .clamp(2, p.machines);
        let mut access = Vec::with_capacity(p.tasks);
        for _ in 0..p.tasks {
            let mut ms: Vec<usize> = (0..p.machines).collect();
            ms.shuffle(&mut rng);
            let mut set: Vec<usize> = ms[..set_size].to_vec();
            set.sort_unstable();
            access.push(set);
        }

        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (i, set) in access.iter().enumerate() {
            for &j in set {
                pairs.push((i, j));
            }
        }
        pairs.sort_unstable();

        let data_partial = WorkloadData {
            params: p.clone(),
            workloads,
            capacity,
            access,
            pairs,
            activation_rows: (0, 0),
            capacity_rows: (0, 0),
            robust_rows: (0, 0),
        };
        let (inst, data) = build_instance(data_partial)?;

        // Feasible by construction is verified with one LP solve.
        let lp = solve_lp(&inst.lp_relaxation(), 50_000);
        if lp.status != LpStatus::Optimal {
            continue;
        }

        let trivial_bound = p.machines as f64; // y = all ones, x from the LP
        let planted_optimum = if p.machines <= 6 {
            enumerate_small_optimum(&inst, 64)
        } else {
            None
        };
        let roles = roles_of(&data);
        let view = StructuredView {
            family: Family::Workload,
            roles,
            data: FamilyData::Workload(data),
            trivial_bound,
            planted_optimum,
        };
        return Ok((inst, view));
    }
    Err(GeneratorError::LpInfeasible {
        attempts: MAX_ATTEMPTS,
    })
}

fn roles_of(data: &WorkloadData) -> Vec<VarRole> {
    let mut roles = Vec::new();
    for machine in 0..data.machines() {
        roles.push(VarRole::MachineY { machine });
    }
    for &(task, machine) in &data.pairs {
        roles.push(VarRole::FlowX { task, machine });
    }
    roles
}

fn build_instance(mut data: WorkloadData) -> Result<(MilpInstance, WorkloadData), GeneratorError> {
    let machines = data.machines();
    let n = machines + data.pairs.len();
    let mut objective = vec![0.0; n];
    let lower = vec![0.0; n];
    let mut upper = Vec::with_capacity(n);
    let mut is_integer = vec![false; n];
    let mut var_names = Vec::with_capacity(n);

    for j in 0..machines {
        objective[j] = 1.0;
        is_integer[j] = true;
        upper.push(1.0);
        var_names.push(format!("y_{j}"));
    }
    for &(i, j) in &data.pairs {
        upper.push(data.capacity[j]); // 0 <= x_ij <= b_j
        var_names.push(format!("x_{i}_{j}"));
    }

    let mut constraints = Vec::new();
    let mut con_names = Vec::new();

    // Activation rows (9): x_ij - a_i y_j <= 0.
    let act_start = 0;
    for (k, &(i, j)) in data.pairs.iter().enumerate() {
        constraints.push(Constraint::new(
            vec![(machines + k, 1.0), (data.y_index(j), -data.workloads[i])],
            Sense::Le,
            0.0,
        ));
        con_names.push(format!("act_{i}_{j}"));
    }
    let act_end = constraints.len();

    // Capacity rows (10): sum_i x_ij <= b_j.
    let cap_start = constraints.len();
    for j in 0..machines {
        let coeffs: Vec<(usize, f64)> = data
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, &(_, m))| m == j)
            .map(|(k, _)| (machines + k, 1.0))
            .collect();
        constraints.push(Constraint::new(coeffs, Sense::Le, data.capacity[j]));
        con_names.push(format!("cap_{j}"));
    }
    let cap_end = constraints.len();

    // Robustness rows (11): for every task and failing machine.
    let rob_start = constraints.len();
    for (i, set) in data.access.iter().enumerate() {
        for &fail in set {
            let coeffs: Vec<(usize, f64)> = set
                .iter()
                .filter(|&&j| j != fail)
                .map(|&j| {
                    let idx = data.x_index(i, j).expect("pair exists");
                    (idx, 1.0)
                })
                .collect();
            constraints.push(Constraint::new(coeffs, Sense::Ge, data.workloads[i]));
            con_names.push(format!("rob_{i}_{fail}"));
        }
    }
    let rob_end = constraints.len();

    data.activation_rows = (act_start, act_end);
    data.capacity_rows = (cap_start, cap_end);
    data.robust_rows = (rob_start, rob_end);

    let inst = MilpInstance::new(
        format!("workload_s{}", data.params.seed),
        objective,
        constraints,
        lower,
        upper,
        is_integer,
        var_names,
        con_names,
    )?;
    Ok((inst, data))
}

/// Structural validator: robustness row count and the `a_i < b_j`
/// observation the tightening step relies on.
pub fn validate_structure(inst: &MilpInstance, data: &WorkloadData) -> Result<(), String> {
    let expected: usize = data.access.iter().map(|s| s.len()).sum();
    let (rs, re) = data.robust_rows;
    if re - rs != expected {
        return Err(format!("expected {expected} robustness rows, got {}", re - rs));
    }
    for (i, set) in data.access.iter().enumerate() {
        for &j in set {
            if data.workloads[i] >= data.capacity[j] {
                return Err(format!("a_{i} >= b_{j} violates the generator contract"));
            }
        }
    }
    if inst.num_constraints() != data.robust_rows.1 {
        return Err("row layout out of sync".to_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_robust_case() {
        let p = WorkloadParams {
            tasks: 1,
            machines: 2,
            density: 1.0,
            ..Default::default()
        };
        let (inst, view) = gen_workload(&p).unwrap();
        let data = view.workload().unwrap();
        assert_eq!(data.access[0], vec![0, 1]);
        // Two robustness rows, each forcing the surviving machine to carry
        // the whole task.
        let (rs, re) = data.robust_rows;
        assert_eq!(re - rs, 2);
        for r in rs..re {
            assert_eq!(inst.constraints[r].coeffs.len(), 1);
            assert_eq!(inst.constraints[r].sense, Sense::Ge);
            assert_eq!(inst.constraints[r].rhs, data.workloads[0]);
        }
    }

    #[test]
    fn robustness_row_count_is_sum_of_access_sizes() {
        for seed in 0..5 {
            let (inst, view) = gen_workload(&WorkloadParams::small(10, 6, seed)).unwrap();
            validate_structure(&inst, view.workload().unwrap()).unwrap();
        }
    }

    #[test]
    fn workloads_stay_below_capacities() {
        let (_, view) = gen_workload(&WorkloadParams::default()).unwrap();
        let data = view.workload().unwrap();
        for (i, set) in data.access.iter().enumerate() {
            for &j in set {
                assert!(data.workloads[i] < data.capacity[j]);
            }
        }
    }

    #[test]
    fn all_ones_round_up_is_feasible() {
        // The generator guarantees an LP-feasible draw; rounding every y up
        // keeps all rows satisfied.
        let (inst, _) = gen_workload(&WorkloadParams::small(8, 5, 2)).unwrap();
        let lp = solve_lp(&inst.lp_relaxation(), 50_000);
        assert_eq!(lp.status, LpStatus::Optimal);
        let mut values = lp.x.clone();
        for j in inst.integer_vars() {
            values[j] = if lp.x[j] > 1e-9 { 1.0 } else { 0.0 };
        }
        let sol = Solution::new(&inst, values);
        assert!(
            crate::model::check_feasibility(&inst, &sol, 1e-6)
                .unwrap()
                .feasible
        );
    }
}
