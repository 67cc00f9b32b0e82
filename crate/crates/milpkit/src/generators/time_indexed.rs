//! Time-indexed family and period recovery.
//!
//! Integer variables live on a planning horizon, one block per period.
//! Constraints are per-period cliques plus coupling rows spanning at most
//! `window` consecutive periods, with nonnegative coefficients and positive
//! right-hand sides, so the all-lower-bound point is always feasible. The
//! period of each variable is recoverable from the variable co-occurrence
//! graph: breadth-first layering from a low-degree root, with the first
//! layer split by forward adjacency.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Constraint, MilpInstance, Sense};

use super::{enumerate_small_optimum, Family, FamilyData, GeneratorError, StructuredView, VarRole};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeIndexedParams {
    /// Number of periods `H`.
    pub horizon: usize,
    /// Integer variables per period.
    pub vars_per_period: usize,
    /// Coupling window: constraints link periods at most this far apart.
    pub window: usize,
    /// Upper bound of every integer variable (lower bound is 0).
    pub var_upper: u32,
    pub seed: u64,
}

impl Default for TimeIndexedParams {
    fn default() -> Self {
        TimeIndexedParams {
            horizon: 8,
            vars_per_period: 6,
            window: 1,
            var_upper: 2,
            seed: 0,
        }
    }
}

impl TimeIndexedParams {
    pub fn small(horizon: usize, vars_per_period: usize, seed: u64) -> Self {
        TimeIndexedParams {
            horizon,
            vars_per_period,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidParams(m.to_string()));
        if self.horizon == 0 || self.vars_per_period == 0 {
            return bad("horizon and vars_per_period must be positive");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.var_upper == 0 {
            return bad("var_upper must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeIndexedData {
    pub params: TimeIndexedParams,
    /// Planted period per variable, 1-based.
    pub periods: Vec<u32>,
}

impl TimeIndexedData {
    pub fn horizon(&self) -> usize {
        self.params.horizon
    }
}

pub fn gen_time_indexed(
    p: &TimeIndexedParams,
) -> Result<(MilpInstance, StructuredView), GeneratorError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5bd1e995);
    let (h, q, w) = (p.horizon, p.vars_per_period, p.window);
    let n = h * q;
    let umax = p.var_upper as f64;

    let mut objective = Vec::with_capacity(n);
    let mut var_names = Vec::with_capacity(n);
    let mut periods = Vec::with_capacity(n);
    for t in 1..=h {
        for s in 0..q {
            objective.push(-rng.gen_range(0.5..3.0));
            var_names.push(format!("u_{t}_{s}"));
            periods.push(t as u32);
        }
    }

    let var = |t: usize, s: usize| (t - 1) * q + s;
    let mut constraints = Vec::new();
    let mut con_names = Vec::new();

    // Per-period resource rows (span 0): feasible at the all-zero point.
    for t in 1..=h {
        let coeffs: Vec<(usize, f64)> = (0..q)
            .map(|s| (var(t, s), rng.gen_range(1.0..3.0)))
            .collect();
        let total: f64 = coeffs.iter().map(|&(_, r)| r * umax).sum();
        constraints.push(Constraint::new(coeffs, Sense::Le, 0.35 * total));
        con_names.push(format!("res_{t}"));
    }
    // Coupling rows spanning periods t..t+w over all their variables.
    for t in 1..=h.saturating_sub(w) {
        let mut coeffs = Vec::new();
        for tt in t..=t + w {
            for s in 0..q {
                coeffs.push((var(tt, s), rng.gen_range(1.0..3.0)));
            }
        }
        let total: f64 = coeffs.iter().map(|&(_, r)| r * umax).sum();
        constraints.push(Constraint::new(coeffs, Sense::Le, 0.3 * total));
        con_names.push(format!("link_{t}"));
    }

    let inst = MilpInstance::new(
        format!("time_indexed_s{}", p.seed),
        objective,
        constraints,
        vec![0.0; n],
        vec![umax; n],
        vec![true; n],
        var_names,
        con_names,
    )?;

    let trivial_bound = 0.0; // objective at x = lower bounds
    let planted_optimum = enumerate_small_optimum(&inst, 4096);
    let roles = periods
        .iter()
        .enumerate()
        .map(|(idx, &period)| VarRole::PeriodVar {
            period,
            slot: idx % q,
        })
        .collect();
    let data = TimeIndexedData {
        params: p.clone(),
        periods,
    };
    let view = StructuredView {
        family: Family::TimeIndexed,
        roles,
        data: FamilyData::TimeIndexed(data),
        trivial_bound,
        planted_optimum,
    };
    Ok((inst, view))
}

/// Result of period recovery from the constraint hypergraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecovery {
    /// Recovered period per variable (1-based); `None` for continuous
    /// variables.
    pub periods: Vec<Option<u32>>,
    /// False when the co-occurrence graph was disconnected and components
    /// were labeled independently.
    pub connected: bool,
}

impl PeriodRecovery {
    pub fn horizon(&self) -> u32 {
        self.periods.iter().flatten().copied().max().unwrap_or(1)
    }
}

/// Deduces a period label per integer variable by breadth-first layering of
/// the variable co-occurrence graph from a degree-based root. The first BFS
/// layer (root's neighborhood) is split by forward adjacency so that chain
/// instances with window 1 recover their planted labels exactly, up to
/// direction.
pub fn recover_periods(inst: &MilpInstance) -> PeriodRecovery {
    let n = inst.num_vars();
    let ints: Vec<usize> = inst.integer_vars().collect();
    let int_pos: Vec<Option<usize>> = {
        let mut m = vec![None; n];
        for (k, &j) in ints.iter().enumerate() {
            m[j] = Some(k);
        }
        m
    };
    let ni = ints.len();
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); ni];
    for con in &inst.constraints {
        let members: Vec<usize> = con
            .coeffs
            .iter()
            .filter_map(|&(j, _)| int_pos[j])
            .collect();
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                adj[members[a]].insert(members[b]);
                adj[members[b]].insert(members[a]);
            }
        }
    }

    let mut periods: Vec<Option<u32>> = vec![None; n];
    let mut visited = vec![false; ni];
    let mut components = 0;

    loop {
        // Lowest-index unvisited vertex of minimum degree seeds the BFS.
        let mut root: Option<usize> = None;
        for k in 0..ni {
            if visited[k] {
                continue;
            }
            root = Some(match root {
                None => k,
                Some(r) if adj[k].len() < adj[r].len() => k,
                Some(r) => r,
            });
        }
        let Some(root) = root else { break };
        components += 1;

        let mut dist = vec![usize::MAX; ni];
        dist[root] = 0;
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }

        let comp: Vec<usize> = (0..ni)
            .filter(|&k| dist[k] != usize::MAX && int_pos[ints[k]].is_some())
            .filter(|&k| dist[k] != usize::MAX)
            .collect();
        // Merge the root into the first layer.
        let layer = |k: usize| dist[k].max(1);
        let max_layer = comp.iter().map(|&k| layer(k)).max().unwrap_or(1);

        // Split layer 1 by adjacency to layer 2: first-period variables see
        // nothing beyond the root's window.
        let mut bucket: Vec<u32> = vec![0; ni];
        let has_forward = |k: usize| adj[k].iter().any(|&u| dist[u] != usize::MAX && layer(u) == 2);
        let split = max_layer >= 2 && comp.iter().any(|&k| layer(k) == 1 && !has_forward(k));
        for &k in &comp {
            let l = layer(k);
            bucket[k] = if split {
                if l == 1 {
                    if has_forward(k) {
                        2
                    } else {
                        1
                    }
                } else {
                    (l + 1) as u32
                }
            } else {
                l as u32
            };
        }
        for &k in &comp {
            periods[ints[k]] = Some(bucket[k]);
        }
    }

    PeriodRecovery {
        periods,
        connected: components <= 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Solution;

    #[test]
    fn window_one_keeps_distant_periods_apart() {
        let p = TimeIndexedParams::small(3, 2, 1);
        let (inst, view) = gen_time_indexed(&p).unwrap();
        let data = view.time_indexed().unwrap();
        for con in &inst.constraints {
            let ps: Vec<u32> = con
                .coeffs
                .iter()
                .map(|&(j, _)| data.periods[j])
                .collect();
            let span = ps.iter().max().unwrap() - ps.iter().min().unwrap();
            assert!(span <= 1, "constraint spans {span} periods");
        }
    }

    #[test]
    fn all_lower_bounds_point_is_feasible() {
        let (inst, view) = gen_time_indexed(&TimeIndexedParams::default()).unwrap();
        let sol = Solution::new(&inst, inst.lower.clone());
        assert!(
            crate::model::check_feasibility(&inst, &sol, 1e-9)
                .unwrap()
                .feasible
        );
        assert_eq!(sol.objective, view.trivial_bound);
    }

    /// Best shift/reflection alignment error between recovered and planted.
    fn alignment_error(recovered: &[Option<u32>], planted: &[u32]) -> u32 {
        let rec: Vec<i64> = recovered.iter().map(|p| p.unwrap() as i64).collect();
        let h = *planted.iter().max().unwrap() as i64;
        let mut best = u32::MAX;
        for reflect in [false, true] {
            let r: Vec<i64> = rec
                .iter()
                .map(|&v| if reflect { h + 1 - v } else { v })
                .collect();
            for shift in -h..=h {
                let err = r
                    .iter()
                    .zip(planted)
                    .map(|(&rv, &pv)| (rv + shift - pv as i64).unsigned_abs() as u32)
                    .max()
                    .unwrap();
                best = best.min(err);
            }
        }
        best
    }

    #[test]
    fn chain_recovery_is_exact_up_to_direction() {
        let p = TimeIndexedParams::small(5, 3, 7);
        let (inst, view) = gen_time_indexed(&p).unwrap();
        let rec = recover_periods(&inst);
        assert!(rec.connected);
        let planted = &view.time_indexed().unwrap().periods;
        assert_eq!(alignment_error(&rec.periods, planted), 0);
    }

    #[test]
    fn single_period_instance_is_one_layer() {
        let p = TimeIndexedParams::small(1, 4, 0);
        let (inst, _) = gen_time_indexed(&p).unwrap();
        let rec = recover_periods(&inst);
        for per in rec.periods.iter().flatten() {
            assert_eq!(*per, 1);
        }
    }

    #[test]
    fn window_two_recovery_within_distance_one() {
        let p = TimeIndexedParams {
            horizon: 4,
            vars_per_period: 3,
            window: 2,
            var_upper: 2,
            seed: 11,
        };
        let (inst, view) = gen_time_indexed(&p).unwrap();
        let rec = recover_periods(&inst);
        let planted = &view.time_indexed().unwrap().periods;
        assert!(alignment_error(&rec.periods, planted) <= 1);
    }

    #[test]
    fn determinism_per_seed() {
        let p = TimeIndexedParams::default();
        let (a, va) = gen_time_indexed(&p).unwrap();
        let (b, vb) = gen_time_indexed(&p).unwrap();
        assert_eq!(crate::mps::write_mps(&a), crate::mps::write_mps(&b));
        assert_eq!(va, vb);
    }
}
