//! Primal heuristics.
//!
//! Three family-specific pipelines plus two generic building blocks
//! (feasibility pump, RINS). Every heuristic is a pure function of
//! (instance, view, seed, budget) under the simulated clock, and every
//! solution it emits passes `check_feasibility` at 1e-6 against the
//! original, untightened instance.

pub mod item_placement;
pub mod pipeline;
pub mod pump;
pub mod rins;
pub mod time_indexed;
pub mod workload;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pipeline::primal_pipeline;
pub use pump::feasibility_pump;
pub use rins::rins;

/// Time and iteration budget of one heuristic invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicBudget {
    /// Overall budget in clock seconds.
    pub wall_seconds: f64,
    /// Budget of each sub-MIP solve.
    pub submip_seconds: f64,
    pub max_iterations: usize,
}

impl Default for HeuristicBudget {
    fn default() -> Self {
        HeuristicBudget {
            wall_seconds: 10.0,
            submip_seconds: 2.0,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("heuristic applied to the wrong family (expected {expected})")]
    WrongFamily { expected: &'static str },
    #[error("no feasible container for item {item}")]
    NoFeasibleContainer { item: usize },
    #[error("{count} big items exceed {containers} containers")]
    BigItemOverflow { count: usize, containers: usize },
    #[error("input solution is infeasible")]
    InfeasibleInput,
    #[error("root LP infeasible: generator contract violated")]
    RootLpInfeasible,
    #[error(transparent)]
    Solve(#[from] crate::bnb::SolveError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}
