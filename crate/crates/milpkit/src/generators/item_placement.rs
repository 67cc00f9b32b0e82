//! Balanced item placement generator.
//!
//! Binary `x_ij` places item `i` into container `j`; `y_jk` measures how far
//! container `j` falls below an even share in dimension `k`, `z_k` the worst
//! such deficit. Rows, in order: assignment equalities, knapsack capacities,
//! unevenness definitions for `y`, peak definitions for `z`. A fixed number
//! of planted "big" items exceed half a container's capacity in every
//! dimension, so no two of them fit together.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Constraint, MilpInstance, Sense, Solution};

use super::{enumerate_small_optimum, Family, FamilyData, GeneratorError, StructuredView, VarRole};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPlacementParams {
    pub items: usize,
    pub containers: usize,
    pub dims: usize,
    /// Objective weight of `y_jk` per dimension.
    pub alpha: Vec<f64>,
    /// Objective weight of `z_k` per dimension.
    pub beta: Vec<f64>,
    /// Capacity `b_k` per dimension.
    pub capacity: Vec<f64>,
    pub big_item_count: usize,
    /// Multiplier applied to the base size draw of planted big items; the
    /// result is clamped above `b_k / 2` so that no two big items share a
    /// container.
    pub big_item_scale: f64,
    pub seed: u64,
}

impl Default for ItemPlacementParams {
    fn default() -> Self {
        ItemPlacementParams {
            items: 105,
            containers: 10,
            dims: 2,
            alpha: vec![1.0, 1.0],
            beta: vec![10.0, 10.0],
            capacity: vec![1.0, 1.0],
            big_item_count: 5,
            big_item_scale: 12.0,
            seed: 0,
        }
    }
}

impl ItemPlacementParams {
    /// Desk-scale variant used by tests and examples.
    pub fn small(items: usize, containers: usize, seed: u64) -> Self {
        ItemPlacementParams {
            items,
            containers,
            big_item_count: (containers / 2).min(2),
            ..ItemPlacementParams { seed, ..Default::default() }
        }
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidParams(m.to_string()));
        if self.items == 0 || self.containers == 0 || self.dims == 0 {
            return bad("items, containers, and dims must be positive");
        }
        if self.alpha.len() != self.dims
            || self.beta.len() != self.dims
            || self.capacity.len() != self.dims
        {
            return bad("alpha, beta, capacity must have one entry per dimension");
        }
        if self
            .alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.capacity)
            .any(|v| *v <= 0.0)
        {
            return bad("alpha, beta, capacity must be positive");
        }
        if 2 * self.big_item_count > self.containers {
            return bad("big_item_count must be at most containers / 2");
        }
        if self.big_item_count > self.items {
            return bad("big_item_count exceeds items");
        }
        Ok(())
    }
}

/// Realized data of one instance: sizes `a[i][k]`, unevenness weights
/// `d[i][k]` (normalized so a perfectly even split gives one unit per
/// container), capacities, objective weights, and the planted big items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPlacementData {
    pub params: ItemPlacementParams,
    pub sizes: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub capacity: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub big_items: Vec<usize>,
}

impl ItemPlacementData {
    pub fn items(&self) -> usize {
        self.sizes.len()
    }

    pub fn containers(&self) -> usize {
        self.params.containers
    }

    pub fn dims(&self) -> usize {
        self.capacity.len()
    }

    pub fn x_index(&self, item: usize, container: usize) -> usize {
        item * self.containers() + container
    }

    pub fn y_index(&self, container: usize, dim: usize) -> usize {
        self.items() * self.containers() + container * self.dims() + dim
    }

    pub fn z_index(&self, dim: usize) -> usize {
        self.items() * self.containers() + self.containers() * self.dims() + dim
    }

    /// Objective value of a full assignment `item -> container`, completing
    /// `y` and `z` at their implied minimal values.
    pub fn assignment_objective(&self, assign: &[usize]) -> f64 {
        let (y, z) = self.completion(assign);
        let mut obj = 0.0;
        for j in 0..self.containers() {
            for k in 0..self.dims() {
                obj += self.alpha[k] * y[j][k];
            }
        }
        for k in 0..self.dims() {
            obj += self.beta[k] * z[k];
        }
        obj
    }

    /// Minimal `y_jk = max(0, 1 - sum_i d_ik x_ij)` and `z_k = max_j y_jk`.
    pub fn completion(&self, assign: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut load = vec![vec![0.0; self.dims()]; self.containers()];
        for (i, &j) in assign.iter().enumerate() {
            for k in 0..self.dims() {
                load[j][k] += self.weights[i][k];
            }
        }
        let y: Vec<Vec<f64>> = load
            .iter()
            .map(|row| row.iter().map(|&w| (1.0 - w).max(0.0)).collect())
            .collect();
        let z = (0..self.dims())
            .map(|k| (0..self.containers()).map(|j| y[j][k]).fold(0.0, f64::max))
            .collect();
        (y, z)
    }

    /// Capacity feasibility of adding `item` to a container withused
    /// per-dimension load `used`.
    pub fn fits(&self, item: usize, used: &[f64]) -> bool {
        (0..self.dims()).all(|k| used[k] + self.sizes[item][k] <= self.capacity[k] + 1e-12)
    }

    /// Full solution vector from an assignment.
    pub fn assignment_solution(&self, inst: &MilpInstance, assign: &[usize]) -> Solution {
        let mut values = vec![0.0; inst.num_vars()];
        for (i, &j) in assign.iter().enumerate() {
            values[self.x_index(i, j)] = 1.0;
        }
        let (y, z) = self.completion(assign);
        for j in 0..self.containers() {
            for k in 0..self.dims() {
                values[self.y_index(j, k)] = y[j][k];
            }
        }
        for k in 0..self.dims() {
            values[self.z_index(k)] = z[k];
        }
        Solution::new(inst, values)
    }

    /// Assignment recovered from a solution's `x` block.
    pub fn assignment_of(&self, values: &[f64]) -> Vec<usize> {
        (0..self.items())
            .map(|i| {
                (0..self.containers())
                    .max_by(|&a, &b| {
                        values[self.x_index(i, a)]
                            .partial_cmp(&values[self.x_index(i, b)])
                            .unwrap()
                    })
                    .unwrap()
            })
            .collect()
    }
}

/// First-fit-decreasing assignment; the generator's feasibility certificate
/// and the source of the trivial initial bound.
fn first_fit_decreasing(data: &ItemPlacementData) -> Option<Vec<usize>> {
    let items = data.items();
    let mut order: Vec<usize> = (0..items).collect();
    order.sort_by(|&a, &b| {
        let sa: f64 = (0..data.dims()).map(|k| data.sizes[a][k] / data.capacity[k]).sum();
        let sb: f64 = (0..data.dims()).map(|k| data.sizes[b][k] / data.capacity[k]).sum();
        sb.partial_cmp(&sa).unwrap().then(a.cmp(&b))
    });
    let mut used = vec![vec![0.0; data.dims()]; data.containers()];
    let mut assign = vec![usize::MAX; items];
    for &i in &order {
        let mut placed = false;
        for j in 0..data.containers() {
            if data.fits(i, &used[j]) {
                assign[i] = j;
                for k in 0..data.dims() {
                    used[j][k] += data.sizes[i][k];
                }
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    Some(assign)
}

const MAX_ATTEMPTS: usize = 20;

pub fn gen_item_placement(
    p: &ItemPlacementParams,
) -> Result<(MilpInstance, StructuredView), GeneratorError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    for _attempt in 0..MAX_ATTEMPTS {
        let mut big_flags = vec![false; p.items];
        {
            let mut order: Vec<usize> = (0..p.items).collect();
            order.shuffle(&mut rng);
            for &i in order.iter().take(p.big_item_count) {
                big_flags[i] = true;
            }
        }
        let mut sizes = vec![vec![0.0; p.dims]; p.items];
        let mut raw_weights = vec![vec![0.0; p.dims]; p.items];
        for i in 0..p.items {
            for k in 0..p.dims {
                let base = p.capacity[k] * rng.gen_range(0.01..0.06);
                let a = if big_flags[i] {
                    (base * p.big_item_scale).clamp(0.505 * p.capacity[k], 0.72 * p.capacity[k])
                } else {
                    base
                };
                sizes[i][k] = a;
                raw_weights[i][k] = a * rng.gen_range(0.8..1.2);
            }
        }
        // Normalize d so that an even split gives one unit per container.
        let mut weights = raw_weights;
        for k in 0..p.dims {
            let total: f64 = (0..p.items).map(|i| weights[i][k]).sum();
            for row in weights.iter_mut() {
                row[k] *= p.containers as f64 / total;
            }
        }
        let big_items: Vec<usize> = (0..p.items).filter(|&i| big_flags[i]).collect();

        let data = ItemPlacementData {
            params: p.clone(),
            sizes,
            weights,
            capacity: p.capacity.clone(),
            alpha: p.alpha.clone(),
            beta: p.beta.clone(),
            big_items,
        };

        let Some(ffd) = first_fit_decreasing(&data) else {
            continue; // capacity-infeasible draw
        };

        let inst = build_instance(&data)?;
        let trivial_bound = data.assignment_objective(&ffd);
        let planted_optimum = enumerate_small_optimum(&inst, 4096);
        let roles = roles_of(&data);
        let view = StructuredView {
            family: Family::ItemPlacement,
            roles,
            data: FamilyData::ItemPlacement(data),
            trivial_bound,
            planted_optimum,
        };
        return Ok((inst, view));
    }
    Err(GeneratorError::CapacityInfeasible {
        attempts: MAX_ATTEMPTS,
    })
}

fn roles_of(data: &ItemPlacementData) -> Vec<VarRole> {
    let mut roles = Vec::new();
    for item in 0..data.items() {
        for container in 0..data.containers() {
            roles.push(VarRole::PlaceX { item, container });
        }
    }
    for container in 0..data.containers() {
        for dim in 0..data.dims() {
            roles.push(VarRole::EvenY { container, dim });
        }
    }
    for dim in 0..data.dims() {
        roles.push(VarRole::PeakZ { dim });
    }
    roles
}

fn build_instance(data: &ItemPlacementData) -> Result<MilpInstance, GeneratorError> {
    let (items, containers, dims) = (data.items(), data.containers(), data.dims());
    let n = items * containers + containers * dims + dims;
    let mut objective = vec![0.0; n];
    let lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    let mut is_integer = vec![false; n];
    let mut var_names = Vec::with_capacity(n);

    for i in 0..items {
        for j in 0..containers {
            let v = data.x_index(i, j);
            is_integer[v] = true;
            upper[v] = 1.0;
            var_names.push(format!("x_{i}_{j}"));
        }
    }
    for j in 0..containers {
        for k in 0..dims {
            objective[data.y_index(j, k)] = data.alpha[k];
            var_names.push(format!("y_{j}_{k}"));
        }
    }
    for k in 0..dims {
        objective[data.z_index(k)] = data.beta[k];
        var_names.push(format!("z_{k}"));
    }

    let mut constraints = Vec::new();
    let mut con_names = Vec::new();
    // Assignment: each item into exactly one container.
    for i in 0..items {
        let coeffs = (0..containers).map(|j| (data.x_index(i, j), 1.0)).collect();
        constraints.push(Constraint::new(coeffs, Sense::Eq, 1.0));
        con_names.push(format!("assign_{i}"));
    }
    // Knapsack capacities per container and dimension.
    for j in 0..containers {
        for k in 0..dims {
            let coeffs = (0..items)
                .map(|i| (data.x_index(i, j), data.sizes[i][k]))
                .collect();
            constraints.push(Constraint::new(coeffs, Sense::Le, data.capacity[k]));
            con_names.push(format!("cap_{j}_{k}"));
        }
    }
    // Unevenness: sum_i d_ik x_ij + y_jk >= 1.
    for j in 0..containers {
        for k in 0..dims {
            let mut coeffs: Vec<(usize, f64)> = (0..items)
                .map(|i| (data.x_index(i, j), data.weights[i][k]))
                .collect();
            coeffs.push((data.y_index(j, k), 1.0));
            constraints.push(Constraint::new(coeffs, Sense::Ge, 1.0));
            con_names.push(format!("even_{j}_{k}"));
        }
    }
    // Peak: y_jk <= z_k.
    for j in 0..containers {
        for k in 0..dims {
            constraints.push(Constraint::new(
                vec![(data.y_index(j, k), 1.0), (data.z_index(k), -1.0)],
                Sense::Le,
                0.0,
            ));
            con_names.push(format!("peak_{j}_{k}"));
        }
    }

    Ok(MilpInstance::new(
        format!("item_placement_s{}", data.params.seed),
        objective,
        constraints,
        lower,
        upper,
        is_integer,
        var_names,
        con_names,
    )?)
}

/// Structural validator used by tests: row pattern and counts match the
/// model equations.
pub fn validate_structure(inst: &MilpInstance, data: &ItemPlacementData) -> Result<(), String> {
    let (items, containers, dims) = (data.items(), data.containers(), data.dims());
    let expected_rows = items + 2 * containers * dims + containers * dims;
    if inst.num_constraints() != expected_rows {
        return Err(format!(
            "expected {expected_rows} rows, got {}",
            inst.num_constraints()
        ));
    }
    for i in 0..items {
        let con = &inst.constraints[i];
        if con.sense != Sense::Eq || con.rhs != 1.0 || con.coeffs.len() != containers {
            return Err(format!("assignment row {i} malformed"));
        }
        if con.coeffs.iter().any(|&(_, a)| a != 1.0) {
            return Err(format!("assignment row {i} has non-unit coefficients"));
        }
    }
    Ok(())
}
