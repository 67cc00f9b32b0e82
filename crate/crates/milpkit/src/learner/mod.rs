//! Branching imitation: features, linear scorer, training, dataset
//! aggregation, weight averaging, and model selection by cumulated reward.
//!
//! The scorer is a flat parameter vector over per-candidate features, so
//! averaging round models is exact arithmetic on the parameters. Selection
//! among the round models and their suffix averages goes by validation
//! cumulated reward, not imitation accuracy.

pub mod dagger;
pub mod eval;
pub mod features;
pub mod scorer;
pub mod train;

pub use dagger::{collect_sb_data, dagger_loop, CollectOptions, CollectPolicy, DaggerOutcome};
pub use eval::{
    evaluate_model, greedy_omega_search, top_k_sba, CrEvaluator, EvalReport, ModelFile,
    OmegaSearchReport, SolverCrEvaluator,
};
pub use features::{extract_features, BranchContext, InstanceScales, NUM_FEATURES};
pub use scorer::{average_weights, ScorerParams};
pub use train::{loss_and_grad, train_scorer, DaggerDataset, DaggerSample, TrainOutcome};
