//! milpkit: a small MILP optimization toolkit.
//!
//! The crate covers three workflows end to end on synthetic instance
//! families, all measured with time-integral metrics under a simulated
//! clock:
//!
//! * **primal**: structure-exploiting primal heuristics (greedy + swap +
//!   sub-MIP construction for item placement, tighten + adaptive rounding +
//!   RINS for workload apportionment, feasibility pump + RENS + rolling
//!   horizon for time-indexed instances);
//! * **dual**: exact branch and bound with pluggable branching rules,
//!   including a scorer trained by imitation of strong branching with
//!   dataset aggregation and model weight averaging;
//! * **configuration**: surrogate-driven tuning of the solver's own
//!   parameter space, sub-space by sub-space.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `milpkit` binary for the file-based workflow.

pub mod bnb;
pub mod clock;
pub mod generators;
pub mod heuristics;
pub mod jsonio;
pub mod learner;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod mps;
pub mod runlog;
pub mod cli;
pub mod tuner;

pub use model::{check_feasibility, Constraint, FeasibilityReport, MilpInstance, Sense, Solution};
