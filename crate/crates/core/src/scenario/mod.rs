//! Scenario trees, price models and fund-strategy evolution.

mod model;
mod montecarlo;
mod strategy;
mod tree;

pub use model::{DriftClass, FactorLaw, JointOutcome, Outcome, PathModel};
pub use montecarlo::{simulate_path, simulate_paths, stream_rng};
pub use strategy::{
    evolve_funds, evolve_path, random_strategy, Allocation, EvolvedTree, FundDecision, FundState, InitialFund,
    RandomStrategyOptions, StrategySpec,
};
pub use tree::{
    build_tree, build_tree_with_budget, classify_drifts, classify_process, conditional_drifts, conditional_expectation,
    Node, NodeId, ProcessClass, ScenarioTree, DEFAULT_NODE_BUDGET,
};
