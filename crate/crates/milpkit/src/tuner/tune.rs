//! The two-layer tuning loop, configuration evaluation, importance-based
//! space reduction, and instance clustering.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bnb::{solve, BnbConfig};
use crate::clock::SimClock;
use crate::generators::StructuredView;
use crate::heuristics::{feasibility_pump, HeuristicBudget};
use crate::lp::{solve_lp, LpStatus};
use crate::metrics::gap_integral;
use crate::model::MilpInstance;

use super::space::{apply_assignment, Assignment, ParamSpace};
use super::surrogate::Forest;
use super::{TrialRecord, TuneError, TunerResult};

/// Instance prepared for tuning: the trivial primal bound and the
/// precomputed root LP value that seed the gap-integral timeline.
#[derive(Debug, Clone)]
pub struct TuningInstance {
    pub inst: MilpInstance,
    pub trivial_bound: f64,
    pub root_lp: f64,
}

impl TuningInstance {
    /// Prepares an instance: root LP solved once; the trivial bound comes
    /// from the sidecar or, failing that, one feasibility-pump run.
    pub fn prepare(inst: MilpInstance, view: Option<&StructuredView>) -> Option<TuningInstance> {
        let lp = solve_lp(&inst.lp_relaxation(), 100_000);
        if lp.status != LpStatus::Optimal {
            return None;
        }
        let trivial = match view {
            Some(v) => v.trivial_bound,
            None => {
                let clock = SimClock::new();
                feasibility_pump(&inst, &HeuristicBudget::default(), &clock)?.objective
            }
        };
        Some(TuningInstance {
            inst,
            trivial_bound: trivial,
            root_lp: lp.objective,
        })
    }
}

/// Runs the solver with `config` on every instance and returns the mean
/// primal-dual gap integral. Instances the solver errors on contribute the
/// trivial-bounds-only rectangle `T * (pb0 - db0)`.
pub fn evaluate_config(
    config: &Assignment,
    instances: &[TuningInstance],
    per_instance_budget: f64,
) -> f64 {
    let totals: Vec<f64> = instances
        .par_iter()
        .map(|ti| {
            let cfg = BnbConfig {
                time_limit: per_instance_budget,
                objective_limit: Some(ti.trivial_bound),
                ..apply_assignment(config, &BnbConfig::default())
            };
            let clock = SimClock::new();
            let worst = per_instance_budget * (ti.trivial_bound - ti.root_lp);
            match solve(&ti.inst, &cfg, None, &clock) {
                Ok(res) => gap_integral(&res.timeline).unwrap_or(worst),
                Err(_) => worst,
            }
        })
        .collect();
    totals.iter().sum::<f64>() / totals.len().max(1) as f64
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    /// Random initial samples per sub-space.
    pub init_samples: usize,
    /// Inner iterations per sub-space (`N`).
    pub iterations: usize,
    /// Proposals per inner iteration (`q`).
    pub proposals: usize,
    pub seed: u64,
    pub per_instance_budget: f64,
    /// Expected-improvement exploration margin.
    pub ei_xi: f64,
    /// Random candidates scored per acquisition maximization.
    pub acq_candidates: usize,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            init_samples: 8,
            iterations: 2,
            proposals: 2,
            seed: 0,
            per_instance_budget: 30.0,
            ei_xi: 0.01,
            acq_candidates: 1024,
        }
    }
}

fn merge(base: &Assignment, partial: &Assignment) -> Assignment {
    let mut out = base.clone();
    for (k, v) in partial {
        out.insert(k.clone(), v.clone());
    }
    out
}

fn normal_cdf(z: f64) -> f64 {
    // Abramowitz-Stegun style erf approximation; plenty for acquisition
    // ranking.
    let t = 1.0 / (1.0 + 0.2316419 * z.abs());
    let poly = t * (0.319381530
        + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf = 1.0 - pdf * poly;
    if z >= 0.0 {
        cdf
    } else {
        1.0 - cdf
    }
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement for minimization.
fn expected_improvement(mean: f64, var: f64, best: f64, xi: f64) -> f64 {
    let sigma = var.sqrt();
    let gain = best - mean - xi;
    if sigma < 1e-12 {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    gain * normal_cdf(z) + sigma * normal_pdf(z)
}

/// Proposes `q` partial configurations maximizing expected improvement
/// under the surrogate: random candidates plus one pass of coordinate
/// refinement, deduplicated.
fn propose(
    space: &ParamSpace,
    subset: &[usize],
    forest: &Forest,
    best_y: f64,
    opts: &TuneOptions,
    rng: &mut ChaCha8Rng,
) -> Vec<Assignment> {
    let score = |a: &Assignment| {
        let (mean, var) = forest.predict(&space.encode(subset, a));
        expected_improvement(mean, var, best_y, opts.ei_xi)
    };
    let mut pool: Vec<(f64, Assignment)> = (0..opts.acq_candidates)
        .map(|_| {
            let a = space.sample(subset, rng);
            (score(&a), a)
        })
        .collect();
    pool.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    pool.truncate(4 * opts.proposals.max(1));

    // Coordinate refinement on the pool leaders.
    for (ei, a) in pool.iter_mut() {
        for &i in subset {
            let p = &space.params[i];
            let candidates: Vec<super::ParamValue> = match &p.kind {
                super::ParamKind::Categorical(vals) => vals
                    .iter()
                    .map(|v| super::ParamValue::Cat(v.clone()))
                    .collect(),
                super::ParamKind::Int { lo, hi } => {
                    let cur = a[&p.name].as_int().unwrap_or(*lo);
                    let step = ((hi - lo) / 8).max(1);
                    [cur - step, cur + step, cur - 1, cur + 1]
                        .iter()
                        .map(|v| super::ParamValue::Int((*v).clamp(*lo, *hi)))
                        .collect()
                }
                super::ParamKind::Float { lo, hi, .. } => {
                    let cur = a[&p.name].as_float().unwrap_or(*lo);
                    let step = (hi - lo) / 16.0;
                    vec![
                        super::ParamValue::Float((cur - step).clamp(*lo, *hi)),
                        super::ParamValue::Float((cur + step).clamp(*lo, *hi)),
                    ]
                }
            };
            for v in candidates {
                let mut trial = a.clone();
                trial.insert(p.name.clone(), v);
                let s = score(&trial);
                if s > *ei {
                    *ei = s;
                    *a = trial;
                }
            }
        }
    }
    pool.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut out: Vec<Assignment> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (_, a) in pool {
        let key = format!("{:?}", space.encode(subset, &a));
        if seen.insert(key) {
            out.push(a);
            if out.len() == opts.proposals {
                break;
            }
        }
    }
    out
}

/// The two-layer loop: for each sub-space, random initialization, surrogate
/// fit, expected-improvement proposals, then a guarded merge of the
/// sub-space argmin into the full solution. The incumbent guard re-evaluates
/// every merge candidate once and keeps the previous full solution unless
/// the merge does not regress.
pub fn tune(
    space: &ParamSpace,
    instances: &[TuningInstance],
    opts: &TuneOptions,
) -> Result<TunerResult, TuneError> {
    if space.partition.is_empty() {
        return Err(TuneError::EmptyPartition);
    }
    if instances.is_empty() {
        return Err(TuneError::NoInstances);
    }

    let mut x_star = space.defaults();
    let default_objective = evaluate_config(&x_star, instances, opts.per_instance_budget);
    let mut incumbent_y = default_objective;
    let mut context_id = 0usize;
    let mut history = Vec::new();
    let mut per_subspace_best = Vec::new();
    let mut merge_evaluations = Vec::new();

    for (si, subset) in space.partition.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(
            opts.seed ^ (si as u64 + 1).wrapping_mul(0xd1b54a32d192ed03),
        );
        let mut xs: Vec<Assignment> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();

        let record = |partial: Assignment,
                          y: f64,
                          xs: &mut Vec<Assignment>,
                          ys: &mut Vec<f64>,
                          history: &mut Vec<TrialRecord>| {
            history.push(TrialRecord {
                subspace: si,
                partial: partial.clone(),
                objective: y,
                context_id,
            });
            xs.push(partial);
            ys.push(y);
        };

        for _ in 0..opts.init_samples {
            let partial = space.sample(subset, &mut rng);
            let y = evaluate_config(&merge(&x_star, &partial), instances, opts.per_instance_budget);
            record(partial, y, &mut xs, &mut ys, &mut history);
        }

        for _ in 0..opts.iterations {
            let encoded: Vec<Vec<f64>> = xs.iter().map(|a| space.encode(subset, a)).collect();
            let forest = Forest::fit(&encoded, &ys, opts.seed ^ (si as u64) << 8);
            let best_y = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            let proposals = propose(space, subset, &forest, best_y, opts, &mut rng);
            // Top up with random samples if refinement deduplicated too much.
            let mut proposals = proposals;
            while proposals.len() < opts.proposals {
                proposals.push(space.sample(subset, &mut rng));
            }
            for partial in proposals {
                let y = evaluate_config(
                    &merge(&x_star, &partial),
                    instances,
                    opts.per_instance_budget,
                );
                record(partial, y, &mut xs, &mut ys, &mut history);
            }
        }

        // Sub-space argmin, then the guarded merge.
        let best_idx = ys
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .expect("at least one trial");
        per_subspace_best.push(Some((xs[best_idx].clone(), ys[best_idx])));
        let merged = merge(&x_star, &xs[best_idx]);
        let merged_y = evaluate_config(&merged, instances, opts.per_instance_budget);
        merge_evaluations.push(merged_y);
        if merged_y <= incumbent_y {
            x_star = merged;
            incumbent_y = merged_y;
            context_id += 1;
        }
    }

    Ok(TunerResult {
        best: x_star,
        best_objective: incumbent_y,
        default_objective,
        history,
        per_subspace_best,
        merge_evaluations,
    })
}

#[derive(Debug, Clone)]
pub struct ReduceOptions {
    /// Parameter names allowed to vary; everything else is frozen first.
    pub allowlist: Option<Vec<String>>,
    /// Random full configurations sampled for the importance fit.
    pub samples: usize,
    /// Parameters kept free after ranking.
    pub keep: usize,
    /// Probe instances (prefix of the tuning set).
    pub probe_instances: usize,
    pub probe_budget: f64,
    pub seed: u64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            allowlist: None,
            samples: 64,
            keep: 12,
            probe_instances: 3,
            probe_budget: 5.0,
            seed: 0,
        }
    }
}

/// Importance-based space reduction: freeze everything outside the expert
/// allowlist, then sample random configurations, fit the tree ensemble to
/// their mean gap integrals, rank parameters by total impurity reduction,
/// and freeze all but the top `keep`. Returns the reduced space and the
/// ranked (parameter, importance) table. Fewer than 16 successful probes
/// abort the reduction and return the allowlist-filtered space.
pub fn reduce_space(
    space: &ParamSpace,
    instances: &[TuningInstance],
    opts: &ReduceOptions,
) -> (ParamSpace, Vec<(String, f64)>) {
    let mut out = space.clone();
    if let Some(allow) = &opts.allowlist {
        for i in 0..out.params.len() {
            if !allow.contains(&out.params[i].name) {
                out.freeze(i);
            }
        }
    }
    if opts.keep >= out.params.iter().enumerate().filter(|(i, _)| !out.is_frozen(*i)).count() {
        return (out, Vec::new());
    }

    let probe = &instances[..opts.probe_instances.min(instances.len())];
    let all: Vec<usize> = (0..out.params.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xfeed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..opts.samples {
        let a = out.sample(&all, &mut rng);
        let y = evaluate_config(&a, probe, opts.probe_budget);
        if y.is_finite() {
            xs.push(out.encode(&all, &a));
            ys.push(y);
        }
    }
    if ys.len() < 16 {
        return (out, Vec::new());
    }

    let forest = Forest::fit(&xs, &ys, opts.seed ^ 0xf0f0);
    let owners = out.feature_owners(&all);
    let mut per_param = vec![0.0; out.params.len()];
    for (f, imp) in forest.importance.iter().enumerate() {
        per_param[owners[f]] += imp;
    }
    let mut ranked: Vec<(String, f64)> = out
        .params
        .iter()
        .enumerate()
        .filter(|(i, _)| !out.is_frozen(*i))
        .map(|(i, p)| (p.name.clone(), per_param[i]))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    for (name, _) in ranked.iter().skip(opts.keep) {
        let idx = out.params.iter().position(|p| &p.name == name).unwrap();
        out.freeze(idx);
    }
    (out, ranked)
}

/// k-means over instance summary features `(n, m, density, integer
/// fraction, period count)`, z-scored. Returns a cluster index per
/// instance.
pub fn cluster_instances(instances: &[MilpInstance], k: usize, seed: u64) -> Vec<usize> {
    let k = k.clamp(1, instances.len().max(1));
    let feats: Vec<Vec<f64>> = instances
        .iter()
        .map(|inst| {
            let n = inst.num_vars() as f64;
            let m = inst.num_constraints().max(1) as f64;
            let nnz: usize = inst.constraints.iter().map(|c| c.coeffs.len()).sum();
            let density = nnz as f64 / (n * m);
            let int_frac = inst.num_int() as f64 / n;
            let periods = crate::generators::recover_periods(inst).horizon() as f64;
            vec![n, m, density, int_frac, periods]
        })
        .collect();
    let dim = 5;
    // z-score normalization
    let mut mean = vec![0.0; dim];
    let mut std = vec![0.0; dim];
    for f in &feats {
        for d in 0..dim {
            mean[d] += f[d];
        }
    }
    for m in &mut mean {
        *m /= feats.len() as f64;
    }
    for f in &feats {
        for d in 0..dim {
            std[d] += (f[d] - mean[d]).powi(2);
        }
    }
    for s in &mut std {
        *s = (*s / feats.len() as f64).sqrt().max(1e-12);
    }
    let normed: Vec<Vec<f64>> = feats
        .iter()
        .map(|f| (0..dim).map(|d| (f[d] - mean[d]) / std[d]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc105_7e5e_ed00_u64);
    let mut order: Vec<usize> = (0..normed.len()).collect();
    order.shuffle(&mut rng);
    let mut centroids: Vec<Vec<f64>> = order[..k].iter().map(|&i| normed[i].clone()).collect();
    let mut assign = vec![0usize; normed.len()];
    for _ in 0..50 {
        let mut changed = false;
        for (i, f) in normed.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| {
                    let da: f64 = (0..dim).map(|d| (f[d] - centroids[a][d]).powi(2)).sum();
                    let db: f64 = (0..dim).map(|d| (f[d] - centroids[b][d]).powi(2)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = normed
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(f, _)| f)
                .collect();
            if members.is_empty() {
                continue;
            }
            for (d, val) in centroid.iter_mut().enumerate() {
                *val = members.iter().map(|f| f[d]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    assign
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuner::space::default_space;

    fn tiny_instances(count: usize) -> Vec<TuningInstance> {
        (0..count)
            .map(|s| {
                let inst = crate::learner::dagger::tests::random_knapsack(s as u64 + 70, 8, 3);
                TuningInstance::prepare(inst, None).expect("knapsacks prepare fine")
            })
            .collect()
    }

    #[test]
    fn evaluate_config_means_and_closed_gap() {
        let instances = tiny_instances(2);
        let space = default_space();
        // Generous budget: tiny knapsacks close their gap almost instantly,
        // so the mean gap integral is small relative to the trivial one.
        let y = evaluate_config(&space.defaults(), &instances, 10.0);
        assert!(y.is_finite() && y >= 0.0);
        let trivial_rect: f64 = instances
            .iter()
            .map(|ti| 10.0 * (ti.trivial_bound - ti.root_lp))
            .sum::<f64>()
            / instances.len() as f64;
        assert!(y < trivial_rect);
    }

    #[test]
    fn history_bookkeeping_matches_the_formula() {
        let instances = tiny_instances(2);
        let space = default_space();
        let opts = TuneOptions {
            init_samples: 2,
            iterations: 1,
            proposals: 2,
            per_instance_budget: 3.0,
            ..Default::default()
        };
        let result = tune(&space, &instances, &opts).unwrap();
        let k = space.partition.len();
        assert_eq!(
            result.history.len(),
            k * (opts.init_samples + opts.iterations * opts.proposals)
        );
        assert!(result.best_objective <= result.default_objective);
        // Full coverage: every parameter assigned in the best config.
        for p in &space.params {
            assert!(result.best.contains_key(&p.name));
        }
    }

    #[test]
    fn reduction_keeps_the_space_inside_the_input() {
        let instances = tiny_instances(2);
        let space = default_space();
        let opts = ReduceOptions {
            samples: 20,
            keep: 4,
            probe_instances: 1,
            probe_budget: 2.0,
            ..Default::default()
        };
        let (reduced, ranked) = reduce_space(&space, &instances, &opts);
        assert_eq!(reduced.params.len(), space.params.len());
        let free = (0..reduced.params.len())
            .filter(|&i| !reduced.is_frozen(i))
            .count();
        assert!(free <= 4.max(space.params.len().saturating_sub(ranked.len())) + 4);
        // Frozen parameters keep their defaults.
        for (i, p) in reduced.params.iter().enumerate() {
            if reduced.is_frozen(i) {
                assert_eq!(p.default, space.params[i].default);
            }
        }
    }

    #[test]
    fn keep_all_reduction_is_identity() {
        let instances = tiny_instances(1);
        let space = default_space();
        let opts = ReduceOptions {
            keep: space.params.len(),
            ..Default::default()
        };
        let (reduced, _) = reduce_space(&space, &instances, &opts);
        assert_eq!(reduced, space);
    }

    #[test]
    fn clustering_is_deterministic_and_total() {
        let instances: Vec<MilpInstance> = (0..9)
            .map(|s| crate::learner::dagger::tests::random_knapsack(s, 6 + (s as usize % 3) * 4, 2))
            .collect();
        let a = cluster_instances(&instances, 3, 1);
        let b = cluster_instances(&instances, 3, 1);
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
        assert!(a.iter().all(|&c| c < 3));
    }
}
