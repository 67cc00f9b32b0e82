//! Exact branch and bound with pluggable branching rules.
//!
//! Nodes solve their LP relaxation from scratch (no basis reuse), branch by
//! floor/ceil bound tightening on one fractional variable, and emit
//! timestamped bound events into a [`BoundsTimeline`]. Strong branching is
//! exposed both as a rule and as the label oracle for imitation learning.
//! Sub-MIPs for the heuristics run through [`solve_submip`] with heuristics
//! disabled.

use std::collections::BTreeMap;
use std::rc::Rc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{Clock, SimClock};
use crate::learner::features::{extract_features, BranchContext, InstanceScales, NUM_FEATURES};
use crate::learner::scorer::ScorerParams;
use crate::lp::{solve_lp_opts, LpOptions, LpStatus};
use crate::metrics::{BoundsTimeline, EventKind};
use crate::model::{check_feasibility, MilpInstance, Solution};

/// Integrality tolerance: LP values closer than this to an integer count as
/// integral.
pub const INT_TOL: f64 = 1e-6;
/// Strong-branching gain floor.
pub const SB_EPS: f64 = 1e-6;
/// Gain credited to a probe whose child LP is infeasible.
pub const SB_INFEASIBLE_GAIN: f64 = 1e8;
/// Strict-improvement slack on incumbent updates and cutoff pruning.
pub const CUTOFF_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeSelection {
    BestBound,
    DepthFirst,
    /// Depth-first until the first incumbent, then best-bound.
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BranchingRule {
    MostFractional,
    Random { seed: u64 },
    StrongBranching,
    PseudoCost,
    Learned(ScorerParams),
}

/// Knobs of the solver-internal primal heuristics; only read when
/// `primal_heuristics_enabled` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    /// Feasibility-pump iteration cap (pump runs once, at the root).
    pub fp_iteration_cap: usize,
    /// Agreement tolerance when RINS fixes variables.
    pub rins_fix_tol: f64,
    /// Gap target of the adaptive rounding loop.
    pub rounding_gap_epsilon: f64,
    /// Rolling-horizon frontier increment is `ceil(H / divisor)`.
    pub rh_delta_divisor: usize,
    /// Simulated-seconds budget of each heuristic sub-MIP.
    pub submip_seconds: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            fp_iteration_cap: 100,
            rins_fix_tol: 1e-6,
            rounding_gap_epsilon: 0.0,
            rh_delta_divisor: 5,
            submip_seconds: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbConfig {
    pub node_selection: NodeSelection,
    pub branching_rule: BranchingRule,
    /// Strong branching probes at most this many of the most fractional
    /// candidates (at most `2 * limit` child LPs per node).
    pub sb_candidate_limit: usize,
    /// Seconds on the injected clock.
    pub time_limit: f64,
    pub node_limit: usize,
    /// User upper cutoff; doubles as the initial primal bound of the
    /// timeline. Nodes with LP bound at or above `cutoff + 1e-9` are pruned,
    /// so supplying the known optimum never loses it.
    pub objective_limit: Option<f64>,
    pub gap_tolerance: f64,
    /// Nodes between internal heuristic calls.
    pub heuristic_frequency: usize,
    pub primal_heuristics_enabled: bool,
    pub heuristics: HeuristicParams,
    pub lp: LpOptions,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            node_selection: NodeSelection::BestBound,
            branching_rule: BranchingRule::MostFractional,
            sb_candidate_limit: 8,
            time_limit: f64::INFINITY,
            node_limit: 1_000_000_000,
            objective_limit: None,
            gap_tolerance: 0.0,
            heuristic_frequency: 20,
            primal_heuristics_enabled: false,
            heuristics: HeuristicParams::default(),
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BnbStatus {
    Optimal,
    Feasible,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub best: Option<Solution>,
    pub timeline: BoundsTimeline,
    pub nodes: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("integer variable {var} has infinite bounds")]
    UnboundedInteger { var: usize },
    #[error("warm-start solution is infeasible (worst violation {violation})")]
    InfeasibleWarm { violation: f64 },
    #[error("root LP did not terminate: {0:?}")]
    RootLpUnresolved(LpStatus),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Bound changes relative to the parent; nodes materialize bounds by
/// walking this chain.
struct NodeDelta {
    parent: Option<Rc<NodeDelta>>,
    var: usize,
    lo: f64,
    hi: f64,
}

struct OpenNode {
    delta: Option<Rc<NodeDelta>>,
    bound: f64,
    depth: usize,
    id: usize,
    /// Pseudo-cost bookkeeping: variable branched to create this node, the
    /// parent LP objective, and the fractionality denominator.
    pc_var: Option<(usize, bool, f64)>, // (var, is_up_child, denom)
    parent_lp: f64,
}

/// Pseudo-cost table with per-variable up/down averages of objective gain
/// per unit of fractionality.
pub struct PcTable {
    up_sum: Vec<f64>,
    up_count: Vec<f64>,
    down_sum: Vec<f64>,
    down_count: Vec<f64>,
    root_initialized: bool,
}

impl PcTable {
    fn new(n: usize) -> Self {
        PcTable {
            up_sum: vec![0.0; n],
            up_count: vec![0.0; n],
            down_sum: vec![0.0; n],
            down_count: vec![0.0; n],
            root_initialized: false,
        }
    }

    fn record(&mut self, var: usize, is_up: bool, gain_per_unit: f64) {
        if is_up {
            self.up_sum[var] += gain_per_unit;
            self.up_count[var] += 1.0;
        } else {
            self.down_sum[var] += gain_per_unit;
            self.down_count[var] += 1.0;
        }
    }

    fn averages(&self) -> (f64, f64) {
        let mut up = 0.0;
        let mut upn = 0.0;
        let mut down = 0.0;
        let mut downn = 0.0;
        for j in 0..self.up_sum.len() {
            up += self.up_sum[j];
            upn += self.up_count[j];
            down += self.down_sum[j];
            downn += self.down_count[j];
        }
        (
            if upn > 0.0 { up / upn } else { 1.0 },
            if downn > 0.0 { down / downn } else { 1.0 },
        )
    }

    /// `(down, up)` per-unit estimates for one variable, falling back to the
    /// table-wide averages when unobserved.
    pub fn estimate(&self, var: usize) -> (f64, f64) {
        let (avg_up, avg_down) = self.averages();
        let down = if self.down_count[var] > 0.0 {
            self.down_sum[var] / self.down_count[var]
        } else {
            avg_down
        };
        let up = if self.up_count[var] > 0.0 {
            self.up_sum[var] / self.up_count[var]
        } else {
            avg_up
        };
        (down, up)
    }
}

/// LP state of one node, the input to strong branching.
pub struct NodeState<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub lp_x: &'a [f64],
    pub lp_obj: f64,
}

/// One strong-branching probe result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbScore {
    pub var: usize,
    pub down_gain: f64,
    pub up_gain: f64,
    /// `max(down, eps) * max(up, eps)`.
    pub score: f64,
}

/// Candidates sorted by descending fractionality (ties by index), truncated
/// to `limit`.
pub fn most_fractional_prefix(lp_x: &[f64], candidates: &[usize], limit: usize) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&j| {
            let f = lp_x[j] - lp_x[j].floor();
            (j, f.min(1.0 - f))
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(limit.max(1));
    scored.into_iter().map(|(j, _)| j).collect()
}

/// Scores each candidate by the product of its down/up child LP objective
/// gains. Infeasible children contribute [`SB_INFEASIBLE_GAIN`]. At most
/// `limit` candidates (the most fractional ones) are probed; two child LPs
/// per probed candidate.
pub fn strong_branching_scores(
    inst: &MilpInstance,
    node: &NodeState,
    candidates: &[usize],
    limit: usize,
    lp_opts: &LpOptions,
    clock: Option<&dyn Clock>,
) -> Vec<SbScore> {
    let probed = most_fractional_prefix(node.lp_x, candidates, limit);
    let mut scratch = inst.clone();
    scratch.lower.copy_from_slice(node.lower);
    scratch.upper.copy_from_slice(node.upper);
    let mut out = Vec::with_capacity(probed.len());
    for &j in &probed {
        let x = node.lp_x[j];
        debug_assert!((x - x.round()).abs() > INT_TOL, "candidate must be fractional");
        let mut gain = [0.0_f64; 2];
        for (side, bound) in [(0usize, x.floor()), (1usize, x.ceil())] {
            let (old_lo, old_hi) = (scratch.lower[j], scratch.upper[j]);
            if side == 0 {
                scratch.upper[j] = bound;
            } else {
                scratch.lower[j] = bound;
            }
            let r = solve_lp_opts(&scratch.lp_relaxation(), lp_opts, clock);
            gain[side] = match r.status {
                LpStatus::Optimal => (r.objective - node.lp_obj).max(0.0),
                LpStatus::Infeasible => SB_INFEASIBLE_GAIN,
                _ => 0.0,
            };
            scratch.lower[j] = old_lo;
            scratch.upper[j] = old_hi;
        }
        out.push(SbScore {
            var: j,
            down_gain: gain[0],
            up_gain: gain[1],
            score: gain[0].max(SB_EPS) * gain[1].max(SB_EPS),
        });
    }
    out
}

/// Argmax selection with ties broken by lowest variable index.
pub fn branch_select_argmax(scores: &[(usize, f64)]) -> Option<usize> {
    scores
        .iter()
        .fold(None::<(usize, f64)>, |best, &(j, s)| match best {
            Some((bj, bs)) if s < bs || (s == bs && j > bj) => Some((bj, bs)),
            _ => Some((j, s)),
        })
        .map(|(j, _)| j)
}

/// Most-fractional selection (max distance to the nearest integer), ties by
/// lowest variable index.
pub fn branch_select_most_fractional(lp_x: &[f64], candidates: &[usize]) -> Option<usize> {
    branch_select_argmax(
        &candidates
            .iter()
            .map(|&j| {
                let f = lp_x[j] - lp_x[j].floor();
                (j, f.min(1.0 - f))
            })
            .collect::<Vec<_>>(),
    )
}

/// One labeled branching decision, as collected for imitation learning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSample {
    /// Feature rows, one per candidate.
    pub features: Vec<[f64; NUM_FEATURES]>,
    /// Candidate variable indices aligned with `features`.
    pub candidates: Vec<usize>,
    /// Index into `candidates` of the strong-branching argmax.
    pub oracle_argmax: usize,
    /// Strong-branching scores aligned with `candidates`.
    pub oracle_scores: Vec<f64>,
    /// Variable the rolled-out policy actually branched on.
    pub chosen: usize,
    pub depth: usize,
}

pub trait BranchObserver {
    fn on_branch(&mut self, sample: BranchSample);
    /// Stop expanding the current solve once enough nodes were observed.
    fn want_more(&self) -> bool {
        true
    }
}

/// Solves `inst` to optimality or until a limit, on the given clock.
pub fn solve(
    inst: &MilpInstance,
    cfg: &BnbConfig,
    warm: Option<&Solution>,
    clock: &dyn Clock,
) -> Result<BnbResult, SolveError> {
    solve_with_observer(inst, cfg, warm, clock, None)
}

/// Convenience wrapper: solve on a fresh simulated clock.
pub fn solve_simulated(
    inst: &MilpInstance,
    cfg: &BnbConfig,
    warm: Option<&Solution>,
) -> Result<BnbResult, SolveError> {
    solve(inst, cfg, warm, &SimClock::new())
}

pub fn solve_with_observer(
    inst: &MilpInstance,
    cfg: &BnbConfig,
    warm: Option<&Solution>,
    clock: &dyn Clock,
    observer: Option<&mut dyn BranchObserver>,
) -> Result<BnbResult, SolveError> {
    Solver::new(inst, cfg, clock)?.run(warm, observer)
}

struct Solver<'a> {
    inst: &'a MilpInstance,
    cfg: &'a BnbConfig,
    clock: &'a dyn Clock,
    t0: f64,
    scales: InstanceScales,
    pc: PcTable,
    rng: ChaCha8Rng,
    open: Vec<OpenNode>,
    incumbent: Option<Solution>,
    next_id: usize,
    nodes: usize,
    timeline: BoundsTimeline,
    last_dual: f64,
    search_incomplete: bool,
    dfs_mode: bool,
    root_lp_value: f64,
}

impl<'a> Solver<'a> {
    fn new(inst: &'a MilpInstance, cfg: &'a BnbConfig, clock: &'a dyn Clock) -> Result<Self, SolveError> {
        if let Some(var) = inst
            .integer_vars()
            .find(|&j| !inst.lower[j].is_finite() || !inst.upper[j].is_finite())
        {
            return Err(SolveError::UnboundedInteger { var });
        }
        let seed = match cfg.branching_rule {
            BranchingRule::Random { seed } => seed,
            _ => 0,
        };
        Ok(Solver {
            inst,
            cfg,
            clock,
            t0: clock.now(),
            scales: InstanceScales::compute(inst),
            pc: PcTable::new(inst.num_vars()),
            rng: ChaCha8Rng::seed_from_u64(seed),
            open: Vec::new(),
            incumbent: None,
            next_id: 0,
            nodes: 0,
            timeline: BoundsTimeline::new(
                cfg.time_limit,
                cfg.objective_limit.unwrap_or(f64::INFINITY),
                f64::NEG_INFINITY,
            ),
            last_dual: f64::NEG_INFINITY,
            search_incomplete: false,
            dfs_mode: !matches!(cfg.node_selection, NodeSelection::BestBound),
            root_lp_value: f64::NEG_INFINITY,
        })
    }

    fn now(&self) -> f64 {
        self.clock.now() - self.t0
    }

    fn out_of_time(&self) -> bool {
        self.now() >= self.cfg.time_limit
    }

    fn cutoff(&self) -> f64 {
        let inc = self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective);
        match self.cfg.objective_limit {
            Some(l) => inc.min(l),
            None => inc,
        }
    }

    fn primal_bound(&self) -> f64 {
        let inc = self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective);
        inc.min(self.cfg.objective_limit.unwrap_or(f64::INFINITY))
    }

    fn event_time(&self) -> f64 {
        // Event times are clamped into the timeline horizon; the run stops
        // right after crossing the limit.
        self.now().min(self.timeline.horizon)
    }

    /// Registers a candidate integral solution; integer entries are snapped
    /// to the nearest integer first. Returns true when it became incumbent.
    fn try_incumbent(&mut self, mut values: Vec<f64>) -> bool {
        for j in self.inst.integer_vars() {
            values[j] = values[j].round();
        }
        let sol = Solution::new(self.inst, values);
        let pb = self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective);
        if sol.objective >= pb - CUTOFF_EPS {
            return false;
        }
        match check_feasibility(self.inst, &sol, 1e-6) {
            Ok(rep) if rep.feasible => {
                let t = self.event_time();
                self.timeline.push(t, EventKind::PrimalUpdate(sol.objective));
                self.incumbent = Some(sol);
                if matches!(self.cfg.node_selection, NodeSelection::Hybrid) {
                    self.dfs_mode = false;
                }
                true
            }
            _ => false,
        }
    }

    fn materialize_bounds(&self, delta: &Option<Rc<NodeDelta>>) -> (Vec<f64>, Vec<f64>) {
        let mut lower = self.inst.lower.clone();
        let mut upper = self.inst.upper.clone();
        // Deltas closer to the node win; apply root-to-leaf.
        let mut chain = Vec::new();
        let mut cur = delta.clone();
        while let Some(d) = cur {
            chain.push(d.clone());
            cur = d.parent.clone();
        }
        for d in chain.iter().rev() {
            lower[d.var] = lower[d.var].max(d.lo);
            upper[d.var] = upper[d.var].min(d.hi);
        }
        (lower, upper)
    }

    /// Emits the global dual bound: the minimum open-node bound, clamped at
    /// the primal bound (closed regions are covered by the incumbent). Only
    /// called at stable points, when no node is mid-expansion.
    fn update_dual_bound(&mut self) {
        let open_min = self
            .open
            .iter()
            .map(|n| n.bound)
            .fold(f64::INFINITY, f64::min);
        let db = open_min.min(self.primal_bound());
        let db = if db.is_finite() { db } else { return };
        if db > self.last_dual {
            let t = self.event_time();
            self.timeline.push(t, EventKind::DualUpdate(db));
            self.last_dual = db;
        }
    }

    fn pop_node(&mut self) -> OpenNode {
        if self.dfs_mode {
            return self.open.pop().unwrap();
        }
        let mut best = 0;
        for i in 1..self.open.len() {
            let (a, b) = (&self.open[i], &self.open[best]);
            if a.bound < b.bound || (a.bound == b.bound && a.id < b.id) {
                best = i;
            }
        }
        self.open.swap_remove(best)
    }

    fn fractional_candidates(lp_x: &[f64], inst: &MilpInstance) -> Vec<usize> {
        inst.integer_vars()
            .filter(|&j| {
                let f = lp_x[j] - lp_x[j].floor();
                f.min(1.0 - f) > INT_TOL
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn select_branch_var(
        &mut self,
        lower: &[f64],
        upper: &[f64],
        lp_x: &[f64],
        lp_obj: f64,
        candidates: &[usize],
        depth: usize,
        observer: &mut Option<&mut dyn BranchObserver>,
    ) -> usize {
        // With an observer attached, every rule decides over the same
        // truncated candidate set the oracle labels.
        let cands: Vec<usize> = if observer.is_some() {
            most_fractional_prefix(lp_x, candidates, self.cfg.sb_candidate_limit)
        } else {
            candidates.to_vec()
        };
        let node = NodeState {
            lower,
            upper,
            lp_x,
            lp_obj,
        };

        // Reliability-1 pseudo-cost initialization at the root.
        if matches!(self.cfg.branching_rule, BranchingRule::PseudoCost) && !self.pc.root_initialized
        {
            let sb = strong_branching_scores(
                self.inst,
                &node,
                &cands,
                self.cfg.sb_candidate_limit,
                &self.cfg.lp,
                Some(self.clock),
            );
            for s in &sb {
                let f = lp_x[s.var] - lp_x[s.var].floor();
                self.pc.record(s.var, false, s.down_gain / f.max(INT_TOL));
                self.pc.record(s.var, true, s.up_gain / (1.0 - f).max(INT_TOL));
            }
            self.pc.root_initialized = true;
        }

        let chosen = match &self.cfg.branching_rule {
            BranchingRule::MostFractional => {
                branch_select_most_fractional(lp_x, &cands).expect("non-empty candidates")
            }
            BranchingRule::Random { .. } => cands[self.rng.gen_range(0..cands.len())],
            BranchingRule::StrongBranching => {
                let sb = strong_branching_scores(
                    self.inst,
                    &node,
                    &cands,
                    self.cfg.sb_candidate_limit,
                    &self.cfg.lp,
                    Some(self.clock),
                );
                branch_select_argmax(&sb.iter().map(|s| (s.var, s.score)).collect::<Vec<_>>())
                    .expect("non-empty candidates")
            }
            BranchingRule::PseudoCost => {
                let scored: Vec<(usize, f64)> = cands
                    .iter()
                    .map(|&j| {
                        let f = lp_x[j] - lp_x[j].floor();
                        let (down, up) = self.pc.estimate(j);
                        (j, (down * f).max(SB_EPS) * (up * (1.0 - f)).max(SB_EPS))
                    })
                    .collect();
                branch_select_argmax(&scored).expect("non-empty candidates")
            }
            BranchingRule::Learned(params) => {
                self.clock.charge(20.0); // model inference cost
                let feats = self.features_for(lp_x, depth, &cands);
                let scores = params.scores(&feats);
                let pairs: Vec<(usize, f64)> =
                    cands.iter().copied().zip(scores).collect();
                branch_select_argmax(&pairs).expect("non-empty candidates")
            }
        };

        if let Some(obs) = observer.as_deref_mut() {
            let sb = strong_branching_scores(
                self.inst,
                &node,
                &cands,
                self.cfg.sb_candidate_limit,
                &self.cfg.lp,
                Some(self.clock),
            );
            let scores: Vec<f64> = sb.iter().map(|s| s.score).collect();
            let argmax = branch_select_argmax(
                &sb.iter().map(|s| (s.var, s.score)).collect::<Vec<_>>(),
            )
            .expect("non-empty candidates");
            let oracle_argmax = cands.iter().position(|&j| j == argmax).unwrap();
            let features = self.features_for(lp_x, depth, &cands);
            obs.on_branch(BranchSample {
                features,
                candidates: cands.clone(),
                oracle_argmax,
                oracle_scores: scores,
                chosen,
                depth,
            });
        }

        chosen
    }

    fn features_for(
        &self,
        lp_x: &[f64],
        depth: usize,
        cands: &[usize],
    ) -> Vec<[f64; NUM_FEATURES]> {
        let pc = &self.pc;
        let gains = move |j: usize, f: f64| {
            let (down, up) = pc.estimate(j);
            (down * f, up * (1.0 - f))
        };
        let ctx = BranchContext {
            inst: self.inst,
            scales: &self.scales,
            lp_x,
            depth,
            incumbent: self.incumbent.as_ref(),
            gain_estimates: &gains,
        };
        extract_features(&ctx, cands)
    }

    /// Round the node LP point on the integers and test it directly; cheap
    /// and surprisingly effective right after bound tightening.
    fn rounding_heuristic(&mut self, lp_x: &[f64]) {
        let mut values = lp_x.to_vec();
        for j in self.inst.integer_vars() {
            values[j] = values[j].round();
        }
        self.clock.charge(2.0);
        self.try_incumbent(values);
    }

    fn root_heuristics(&mut self, root_x: &[f64]) {
        if !self.cfg.primal_heuristics_enabled {
            return;
        }
        self.rounding_heuristic(root_x);
        if self.incumbent.is_none() {
            if let Some(sol) = crate::heuristics::pump::feasibility_pump_core(
                self.inst,
                self.cfg.heuristics.fp_iteration_cap,
                &self.cfg.lp,
                self.clock,
                self.t0 + self.cfg.time_limit,
            ) {
                self.try_incumbent(sol.values);
            }
        }
    }

    fn periodic_heuristics(&mut self, lp_x: &[f64]) {
        if !self.cfg.primal_heuristics_enabled || self.cfg.heuristic_frequency == 0 {
            return;
        }
        if self.nodes % self.cfg.heuristic_frequency == 0 {
            self.rounding_heuristic(lp_x);
        }
        // RINS on the node LP every fourth heuristic call.
        if self.nodes % (4 * self.cfg.heuristic_frequency) == 0 {
            if let Some(inc) = self.incumbent.clone() {
                let budget = self.cfg.heuristics.submip_seconds;
                if let Ok(Some(sol)) = crate::heuristics::rins::rins_with_tol(
                    self.inst,
                    &inc,
                    lp_x,
                    self.cfg.heuristics.rins_fix_tol,
                    budget,
                    &self.cfg.lp,
                    self.clock,
                ) {
                    self.try_incumbent(sol.values);
                }
            }
        }
    }

    fn gap_closed(&self) -> bool {
        let pb = self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective);
        if !pb.is_finite() || !self.last_dual.is_finite() {
            return false;
        }
        pb - self.last_dual <= self.cfg.gap_tolerance * (1.0 + pb.abs())
    }

    fn run(
        mut self,
        warm: Option<&Solution>,
        mut observer: Option<&mut dyn BranchObserver>,
    ) -> Result<BnbResult, SolveError> {
        if let Some(w) = warm {
            let rep = check_feasibility(self.inst, w, 1e-6)?;
            if !rep.feasible {
                return Err(SolveError::InfeasibleWarm {
                    violation: rep
                        .worst_constraint_violation
                        .max(rep.worst_integrality_violation)
                        .max(rep.worst_bound_violation),
                });
            }
            let t = self.event_time();
            self.timeline.push(t, EventKind::PrimalUpdate(w.objective));
            self.incumbent = Some(w.clone());
            if matches!(self.cfg.node_selection, NodeSelection::Hybrid) {
                self.dfs_mode = false;
            }
        }

        // Root LP: provides the initial dual bound z*_0.
        let root = solve_lp_opts(&self.inst.lp_relaxation(), &self.cfg.lp, Some(self.clock));
        match root.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Ok(self.finish(BnbStatus::Infeasible));
            }
            other => return Err(SolveError::RootLpUnresolved(other)),
        }
        self.root_lp_value = root.objective;
        self.timeline.initial_dual = root.objective;
        self.last_dual = root.objective;
        let t = self.event_time();
        self.timeline.push(t, EventKind::DualUpdate(root.objective));

        self.open.push(OpenNode {
            delta: None,
            bound: root.objective,
            depth: 0,
            id: self.next_id,
            pc_var: None,
            parent_lp: root.objective,
        });
        self.next_id += 1;

        let mut root_x = Some(root.x);

        while let Some(_) = (!self.open.is_empty()).then_some(()) {
            if self.out_of_time() || self.nodes >= self.cfg.node_limit {
                self.search_incomplete = true;
                break;
            }
            if let Some(obs) = observer.as_deref() {
                if !obs.want_more() {
                    self.search_incomplete = true;
                    break;
                }
            }
            if self.gap_closed() {
                break;
            }

            self.update_dual_bound();
            let node = self.pop_node();
            if node.bound >= self.cutoff() + CUTOFF_EPS {
                // Repruned: bound was computed before the incumbent improved.
                continue;
            }

            self.nodes += 1;
            self.clock.charge(2.0);
            let (lower, upper) = self.materialize_bounds(&node.delta);

            let lp = if node.depth == 0 && root_x.is_some() {
                // Reuse the root solve.
                crate::lp::LpResult {
                    status: LpStatus::Optimal,
                    x: root_x.take().unwrap(),
                    objective: self.root_lp_value,
                    iterations: 0,
                }
            } else {
                let mut scratch = self.inst.clone();
                scratch.lower = lower.clone();
                scratch.upper = upper.clone();
                solve_lp_opts(&scratch.lp_relaxation(), &self.cfg.lp, Some(self.clock))
            };

            self.timeline.push(self.event_time(), EventKind::NodeProcessed);

            match lp.status {
                LpStatus::Infeasible => continue,
                LpStatus::Optimal => {}
                _ => {
                    // The node could not be resolved within LP limits; the
                    // search is no longer exhaustive.
                    self.search_incomplete = true;
                    continue;
                }
            }

            // Pseudo-cost update from the realized child gain.
            if let Some((var, is_up, denom)) = node.pc_var {
                let gain = (lp.objective - node.parent_lp).max(0.0);
                self.pc.record(var, is_up, gain / denom.max(INT_TOL));
            }

            let bound = lp.objective.max(node.bound);
            if bound >= self.cutoff() + CUTOFF_EPS {
                continue;
            }

            let candidates = Self::fractional_candidates(&lp.x, self.inst);
            if candidates.is_empty() {
                self.try_incumbent(lp.x);
                continue;
            }

            if node.depth == 0 {
                self.root_heuristics(&lp.x);
            } else {
                self.periodic_heuristics(&lp.x);
            }

            let var = self.select_branch_var(
                &lower,
                &upper,
                &lp.x,
                lp.objective,
                &candidates,
                node.depth,
                &mut observer,
            );
            let xv = lp.x[var];
            let f = xv - xv.floor();

            // Down child: x_var <= floor, up child: x_var >= ceil.
            let children = [
                (xv.floor(), false, lower[var], xv.floor(), f),
                (xv.ceil(), true, xv.ceil(), upper[var], 1.0 - f),
            ];
            for &(_, is_up, lo, hi, denom) in &children {
                if lo > hi {
                    continue;
                }
                let delta = Rc::new(NodeDelta {
                    parent: node.delta.clone(),
                    var,
                    lo,
                    hi,
                });
                self.open.push(OpenNode {
                    delta: Some(delta),
                    bound,
                    depth: node.depth + 1,
                    id: self.next_id,
                    pc_var: Some((var, is_up, denom)),
                    parent_lp: lp.objective,
                });
                self.next_id += 1;
            }
        }
        self.update_dual_bound();

        let status = if self.search_incomplete {
            if self.incumbent.is_some() {
                BnbStatus::Feasible
            } else {
                BnbStatus::LimitReached
            }
        } else if self.incumbent.is_some() {
            BnbStatus::Optimal
        } else if self.cfg.objective_limit.is_some() {
            // Exhausted search under a user cutoff: nothing at or below the
            // limit exists, which we report as infeasible-under-limit.
            BnbStatus::Infeasible
        } else {
            BnbStatus::Infeasible
        };
        Ok(self.finish(status))
    }

    fn finish(mut self, status: BnbStatus) -> BnbResult {
        if status == BnbStatus::Optimal {
            if let Some(inc) = &self.incumbent {
                if inc.objective > self.last_dual {
                    let t = self.event_time();
                    self.timeline.push(t, EventKind::DualUpdate(inc.objective));
                    self.last_dual = inc.objective;
                }
            }
        }
        if !self.timeline.horizon.is_finite() {
            self.timeline.horizon = self.now().max(1e-9);
            // Events sit inside the horizon by construction.
        }
        BnbResult {
            status,
            best: self.incumbent,
            timeline: self.timeline,
            nodes: self.nodes,
        }
    }
}

/// Solves the restriction of `inst` built by fixing, relaxing, and dropping
/// rows, within `budget` simulated seconds. Returns the best feasible
/// solution of the restricted problem, if any. `warm` is registered when it
/// is feasible in the restriction.
pub fn solve_submip(
    inst: &MilpInstance,
    fixings: &BTreeMap<usize, f64>,
    relaxations: &[usize],
    dropped_constraints: &[usize],
    budget: f64,
    lp_opts: &LpOptions,
    clock: &dyn Clock,
    warm: Option<&Solution>,
) -> Result<Option<Solution>, SolveError> {
    let mut sub = inst.fix_variables(fixings)?.relax_integrality(relaxations)?;
    if !dropped_constraints.is_empty() {
        let drop: std::collections::BTreeSet<usize> =
            dropped_constraints.iter().copied().collect();
        let rows = sub
            .constraints
            .iter()
            .enumerate()
            .filter(|(r, _)| !drop.contains(r))
            .map(|(_, c)| c.clone())
            .collect();
        let names = sub
            .con_names
            .iter()
            .enumerate()
            .filter(|(r, _)| !drop.contains(r))
            .map(|(_, n)| n.clone())
            .collect();
        sub = sub.with_constraints(rows, names)?;
    }
    let cfg = BnbConfig {
        node_selection: NodeSelection::Hybrid,
        branching_rule: BranchingRule::MostFractional,
        time_limit: budget,
        primal_heuristics_enabled: false,
        lp: lp_opts.clone(),
        ..BnbConfig::default()
    };
    let warm_ok = warm.filter(|w| {
        check_feasibility(&sub, w, 1e-6)
            .map(|r| r.feasible)
            .unwrap_or(false)
    });
    // The sub-solve keeps charging the shared clock but reports times
    // relative to its own start.
    let res = solve(&sub, &cfg, warm_ok, clock)?;
    Ok(res.best)
}
