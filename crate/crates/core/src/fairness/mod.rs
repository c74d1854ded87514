//! Fairness of group indexes: exact tree checks, Monte Carlo estimates,
//! the random-fund reading of the chain-linked index and the axiom suite.

mod axioms;
mod exact;
pub mod generate;
mod montecarlo;
mod remark;
mod sampling;

pub use axioms::{
    axiom_suite, axiom_suite_for, grouping_cases, instance_seed, replay, AxiomConfig, AxiomReport, Counterexample,
    GroupingCase, InstanceOutcome, Property, PropertyResult,
};
pub use exact::{
    index_process, verdict_for, verify_fairness_exact, verify_unit_ratio_identity, FairnessVerdict, UnitRatioCheck,
};
pub use montecarlo::{mc_fairness_test, IncrementStat, McFairnessReport, Policy};
pub use remark::{rpl_bias_demo, rpl_closed_form, RplBias};
pub use sampling::{sampling_interpretation_check, SamplingEstimate};
