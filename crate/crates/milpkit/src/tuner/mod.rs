//! Solver configuration tuning.
//!
//! A partitioned parameter space over the branch-and-bound solver's own
//! knobs, optimized sub-space by sub-space: random initialization, a
//! tree-ensemble surrogate, expected-improvement proposals, and an incumbent
//! guard on the full-solution merge. The objective of a configuration is
//! the mean primal-dual gap integral over the tuning instances under the
//! simulated clock.

pub mod space;
pub mod surrogate;
pub mod tune;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use space::{
    apply_assignment, default_space, Assignment, ParamDef, ParamKind, ParamSpace, ParamValue,
};
pub use surrogate::Forest;
pub use tune::{
    cluster_instances, evaluate_config, reduce_space, tune, ReduceOptions, TuneOptions,
    TuningInstance,
};

/// One evaluated partial configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub subspace: usize,
    pub partial: Assignment,
    /// Mean gap integral of the partial merged into the then-current full
    /// solution.
    pub objective: f64,
    /// Snapshot id of the full solution the partial was merged into.
    pub context_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunerResult {
    /// Complete best-performing configuration.
    pub best: Assignment,
    pub best_objective: f64,
    pub default_objective: f64,
    pub history: Vec<TrialRecord>,
    /// Best partial per sub-space with its trial objective.
    pub per_subspace_best: Vec<Option<(Assignment, f64)>>,
    /// Objectives of the guarded merge re-evaluations, one per sub-space.
    pub merge_evaluations: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("parameter space has no sub-spaces")]
    EmptyPartition,
    #[error("no tuning instances")]
    NoInstances,
    #[error("unknown parameter '{0}' in assignment")]
    UnknownParam(String),
    #[error(transparent)]
    Solve(#[from] crate::bnb::SolveError),
}
