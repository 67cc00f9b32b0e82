//! The tunable parameter space and its mapping onto solver configs.

use std::collections::BTreeMap;

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bnb::{BnbConfig, BranchingRule, NodeSelection};
use crate::lp::PivotRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamKind {
    Categorical(Vec<String>),
    Int { lo: i64, hi: i64 },
    Float { lo: f64, hi: f64, log: bool },
}

#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Cat(String),
    Int(i64),
    Float(f64),
}

impl ParamValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            ParamValue::Float(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub kind: ParamKind,
    pub default: ParamValue,
}

/// Full or partial configuration, keyed by parameter name.
pub type Assignment = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub params: Vec<ParamDef>,
    /// Disjoint index groups covering every parameter exactly once.
    pub partition: Vec<Vec<usize>>,
}

impl ParamSpace {
    pub fn defaults(&self) -> Assignment {
        self.params
            .iter()
            .map(|p| (p.name.clone(), p.default.clone()))
            .collect()
    }

    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Partition is an exact cover of the parameter indices.
    pub fn partition_is_exact_cover(&self) -> bool {
        let mut seen = vec![false; self.params.len()];
        for group in &self.partition {
            for &i in group {
                if i >= seen.len() || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.iter().all(|&b| b)
    }

    /// Re-chunks the parameters into `k` contiguous groups.
    pub fn repartition(&mut self, k: usize) {
        let k = k.clamp(1, self.params.len().max(1));
        let chunk = self.params.len().div_ceil(k);
        self.partition = (0..self.params.len())
            .collect::<Vec<_>>()
            .chunks(chunk)
            .map(|c| c.to_vec())
            .collect();
    }

    /// Uniform sample of the given parameters.
    pub fn sample(&self, subset: &[usize], rng: &mut impl Rng) -> Assignment {
        subset
            .iter()
            .map(|&i| {
                let p = &self.params[i];
                let v = match &p.kind {
                    ParamKind::Categorical(vals) => {
                        ParamValue::Cat(vals[rng.gen_range(0..vals.len())].clone())
                    }
                    ParamKind::Int { lo, hi } => ParamValue::Int(rng.gen_range(*lo..=*hi)),
                    ParamKind::Float { lo, hi, log } => {
                        if lo == hi {
                            ParamValue::Float(*lo)
                        } else if *log {
                            ParamValue::Float((rng.gen_range(lo.ln()..=hi.ln())).exp())
                        } else {
                            ParamValue::Float(rng.gen_range(*lo..=*hi))
                        }
                    }
                };
                (p.name.clone(), v)
            })
            .collect()
    }

    /// Freezes a parameter: its domain collapses onto the default.
    pub fn freeze(&mut self, index: usize) {
        let p = &mut self.params[index];
        p.kind = match (&p.kind, &p.default) {
            (ParamKind::Categorical(_), ParamValue::Cat(d)) => {
                ParamKind::Categorical(vec![d.clone()])
            }
            (ParamKind::Int { .. }, ParamValue::Int(d)) => ParamKind::Int { lo: *d, hi: *d },
            (ParamKind::Float { log, .. }, ParamValue::Float(d)) => ParamKind::Float {
                lo: *d,
                hi: *d,
                log: *log,
            },
            (kind, _) => kind.clone(),
        };
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        match &self.params[index].kind {
            ParamKind::Categorical(vals) => vals.len() <= 1,
            ParamKind::Int { lo, hi } => lo == hi,
            ParamKind::Float { lo, hi, .. } => lo == hi,
        }
    }

    /// Feature encoding of an assignment: one-hot categoricals, min-max
    /// normalized numericals (log domain where marked). Returns the vector
    /// and, once per space, the owning parameter of each feature.
    pub fn encode(&self, subset: &[usize], a: &Assignment) -> Vec<f64> {
        let mut out = Vec::new();
        for &i in subset {
            let p = &self.params[i];
            let v = &a[&p.name];
            match &p.kind {
                ParamKind::Categorical(vals) => {
                    let chosen = v.as_str().unwrap_or_default();
                    for val in vals {
                        out.push(if val == chosen { 1.0 } else { 0.0 });
                    }
                }
                ParamKind::Int { lo, hi } => {
                    let x = v.as_float().unwrap_or(*lo as f64);
                    let range = (*hi - *lo) as f64;
                    out.push(if range > 0.0 {
                        (x - *lo as f64) / range
                    } else {
                        0.0
                    });
                }
                ParamKind::Float { lo, hi, log } => {
                    let x = v.as_float().unwrap_or(*lo);
                    let (x, lo, hi) = if *log {
                        (x.ln(), lo.ln(), hi.ln())
                    } else {
                        (x, *lo, *hi)
                    };
                    out.push(if hi > lo { (x - lo) / (hi - lo) } else { 0.0 });
                }
            }
        }
        out
    }

    /// Owning parameter index per encoded feature.
    pub fn feature_owners(&self, subset: &[usize]) -> Vec<usize> {
        let mut owners = Vec::new();
        for &i in subset {
            let width = match &self.params[i].kind {
                ParamKind::Categorical(vals) => vals.len(),
                _ => 1,
            };
            owners.extend(std::iter::repeat(i).take(width));
        }
        owners
    }
}

/// The solver's own tunable parameters, grouped into four themed
/// sub-spaces: branching, node selection, heuristics, LP.
pub fn default_space() -> ParamSpace {
    use ParamKind as K;
    use ParamValue as V;
    let cat = |vals: &[&str]| K::Categorical(vals.iter().map(|s| s.to_string()).collect());
    let params = vec![
        // Branching.
        ParamDef {
            name: "branching_rule".into(),
            kind: cat(&["most_fractional", "random", "strong_branching", "pseudocost"]),
            default: V::Cat("most_fractional".into()),
        },
        ParamDef {
            name: "sb_candidate_limit".into(),
            kind: K::Int { lo: 2, hi: 16 },
            default: V::Int(8),
        },
        ParamDef {
            name: "branching_seed".into(),
            kind: K::Int { lo: 0, hi: 7 },
            default: V::Int(0),
        },
        // Node selection.
        ParamDef {
            name: "node_selection".into(),
            kind: cat(&["best_bound", "depth_first", "hybrid"]),
            default: V::Cat("best_bound".into()),
        },
        // Heuristics.
        ParamDef {
            name: "primal_heuristics_enabled".into(),
            kind: cat(&["false", "true"]),
            default: V::Cat("false".into()),
        },
        ParamDef {
            name: "heuristic_frequency".into(),
            kind: K::Int { lo: 5, hi: 100 },
            default: V::Int(20),
        },
        ParamDef {
            name: "fp_iteration_cap".into(),
            kind: K::Int { lo: 10, hi: 400 },
            default: V::Int(100),
        },
        ParamDef {
            name: "rins_fix_tol".into(),
            kind: K::Float { lo: 1e-9, hi: 1e-3, log: true },
            default: V::Float(1e-6),
        },
        ParamDef {
            name: "rounding_gap_epsilon".into(),
            kind: K::Float { lo: 0.0, hi: 2.0, log: false },
            default: V::Float(0.0),
        },
        ParamDef {
            name: "rh_delta_divisor".into(),
            kind: K::Int { lo: 2, hi: 10 },
            default: V::Int(5),
        },
        ParamDef {
            name: "submip_seconds".into(),
            kind: K::Float { lo: 0.5, hi: 5.0, log: false },
            default: V::Float(2.0),
        },
        // LP.
        ParamDef {
            name: "pivot_rule".into(),
            kind: cat(&["dantzig", "bland"]),
            default: V::Cat("dantzig".into()),
        },
        ParamDef {
            name: "lp_iteration_limit".into(),
            kind: K::Int { lo: 2_000, hi: 100_000 },
            default: V::Int(crate::lp::DEFAULT_ITERATION_LIMIT as i64),
        },
    ];
    ParamSpace {
        partition: vec![vec![0, 1, 2], vec![3], vec![4, 5, 6, 7, 8, 9, 10], vec![11, 12]],
        params,
    }
}

/// Builds a solver config from a complete assignment, on top of `base`
/// (which supplies the run limits the space does not cover).
pub fn apply_assignment(a: &Assignment, base: &BnbConfig) -> BnbConfig {
    let mut cfg = base.clone();
    let s = |k: &str| a.get(k).and_then(|v| v.as_str().map(str::to_string));
    let int = |k: &str| a.get(k).and_then(|v| v.as_int());
    let fl = |k: &str| a.get(k).and_then(|v| v.as_float());

    if let Some(rule) = s("branching_rule") {
        cfg.branching_rule = match rule.as_str() {
            "random" => BranchingRule::Random {
                seed: int("branching_seed").unwrap_or(0) as u64,
            },
            "strong_branching" => BranchingRule::StrongBranching,
            "pseudocost" => BranchingRule::PseudoCost,
            _ => BranchingRule::MostFractional,
        };
    }
    if let Some(v) = int("sb_candidate_limit") {
        cfg.sb_candidate_limit = v.max(1) as usize;
    }
    if let Some(sel) = s("node_selection") {
        cfg.node_selection = match sel.as_str() {
            "depth_first" => NodeSelection::DepthFirst,
            "hybrid" => NodeSelection::Hybrid,
            _ => NodeSelection::BestBound,
        };
    }
    if let Some(v) = s("primal_heuristics_enabled") {
        cfg.primal_heuristics_enabled = v == "true";
    }
    if let Some(v) = int("heuristic_frequency") {
        cfg.heuristic_frequency = v.max(1) as usize;
    }
    if let Some(v) = int("fp_iteration_cap") {
        cfg.heuristics.fp_iteration_cap = v.max(1) as usize;
    }
    if let Some(v) = fl("rins_fix_tol") {
        cfg.heuristics.rins_fix_tol = v;
    }
    if let Some(v) = fl("rounding_gap_epsilon") {
        cfg.heuristics.rounding_gap_epsilon = v;
    }
    if let Some(v) = int("rh_delta_divisor") {
        cfg.heuristics.rh_delta_divisor = v.max(1) as usize;
    }
    if let Some(v) = fl("submip_seconds") {
        cfg.heuristics.submip_seconds = v;
    }
    if let Some(v) = s("pivot_rule") {
        cfg.lp.pivot_rule = if v == "bland" {
            PivotRule::Bland
        } else {
            PivotRule::Dantzig
        };
    }
    if let Some(v) = int("lp_iteration_limit") {
        cfg.lp.iteration_limit = v.max(100) as usize;
    }
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partition_covers_all_params_exactly_once() {
        let space = default_space();
        assert!(space.partition_is_exact_cover());
        assert_eq!(space.partition.len(), 4);
    }

    #[test]
    fn defaults_reproduce_the_unconfigured_solver() {
        let space = default_space();
        let base = BnbConfig::default();
        let cfg = apply_assignment(&space.defaults(), &base);
        assert_eq!(cfg, base);
    }

    #[test]
    fn samples_stay_in_bounds_and_encode_into_unit_range() {
        let space = default_space();
        let all: Vec<usize> = (0..space.params.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = space.sample(&all, &mut rng);
            for (i, p) in space.params.iter().enumerate() {
                match (&p.kind, &a[&p.name]) {
                    (ParamKind::Categorical(vals), ParamValue::Cat(v)) => {
                        assert!(vals.contains(v))
                    }
                    (ParamKind::Int { lo, hi }, ParamValue::Int(v)) => {
                        assert!(v >= lo && v <= hi)
                    }
                    (ParamKind::Float { lo, hi, .. }, ParamValue::Float(v)) => {
                        assert!(v >= lo && v <= hi)
                    }
                    _ => panic!("kind mismatch at {i}"),
                }
            }
            let enc = space.encode(&all, &a);
            assert_eq!(enc.len(), space.feature_owners(&all).len());
            for v in enc {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn freezing_collapses_the_domain_onto_the_default() {
        let mut space = default_space();
        for i in 0..space.params.len() {
            space.freeze(i);
            assert!(space.is_frozen(i));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let all: Vec<usize> = (0..space.params.len()).collect();
        let a = space.sample(&all, &mut rng);
        assert_eq!(a, space.defaults());
    }

    #[test]
    fn repartition_chunks_contiguously() {
        let mut space = default_space();
        space.repartition(3);
        assert_eq!(space.partition.len(), 3);
        assert!(space.partition_is_exact_cover());
    }
}
