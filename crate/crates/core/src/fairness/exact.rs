//! Exact fairness checks on a scenario tree.

use serde::Serialize;

use crate::error::Result;
use crate::indices::{index, IndexKind};
use crate::ledger::FundId;
use crate::scenario::{
    classify_drifts, conditional_drifts, evolve_funds, EvolvedTree, InitialFund, NodeId, ProcessClass, ScenarioTree,
    StrategySpec,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessVerdict {
    pub kind: IndexKind,
    pub classification: ProcessClass,
    /// Largest `|δ|` for a martingale verdict, otherwise the largest
    /// increment of the wrong sign (0 when there is none).
    pub max_violation: f64,
    /// Node with the largest `|δ|`.
    pub witness: Option<NodeId>,
    pub witness_drift: f64,
    pub min_drift: f64,
    pub max_drift: f64,
    pub tol: f64,
}

/// Index value `X(0, depth(v))` at every node `v`.
pub fn index_process(evolved: &EvolvedTree<'_>, kind: IndexKind) -> Result<Vec<f64>> {
    let tree = evolved.tree();
    (0..tree.len())
        .map(|v| {
            let depth = tree.node(v).depth;
            if depth == 0 {
                Ok(0.0)
            } else {
                index(&evolved.path_history(v)?, kind, 0, depth)
            }
        })
        .collect()
}

fn verdict(kind: IndexKind, drifts: &[(NodeId, f64)], tol: f64) -> FairnessVerdict {
    let classification = classify_drifts(drifts, tol);
    let mut min_drift = f64::INFINITY;
    let mut max_drift = f64::NEG_INFINITY;
    let mut witness = None;
    let mut witness_drift = 0.0f64;
    for &(n, d) in drifts {
        min_drift = min_drift.min(d);
        max_drift = max_drift.max(d);
        if witness.is_none() || d.abs() > witness_drift.abs() {
            witness = Some(n);
            witness_drift = d;
        }
    }
    if drifts.is_empty() {
        min_drift = 0.0;
        max_drift = 0.0;
    }
    let max_violation = match classification {
        ProcessClass::Submartingale => (-min_drift).max(0.0),
        ProcessClass::Supermartingale => max_drift.max(0.0),
        ProcessClass::Martingale | ProcessClass::None => witness_drift.abs(),
    };
    FairnessVerdict {
        kind,
        classification,
        max_violation,
        witness,
        witness_drift,
        min_drift,
        max_drift,
        tol,
    }
}

/// Classifies the index process of an already evolved tree.
pub fn verdict_for(evolved: &EvolvedTree<'_>, kind: IndexKind, tol: f64) -> Result<FairnessVerdict> {
    let x = index_process(evolved, kind)?;
    let drifts = conditional_drifts(evolved.tree(), |v| x[v]);
    Ok(verdict(kind, &drifts, tol))
}

pub fn verify_fairness_exact(
    tree: &ScenarioTree,
    strategy: &StrategySpec,
    initial: &[InitialFund],
    kind: IndexKind,
    tol: f64,
) -> Result<FairnessVerdict> {
    let evolved = evolve_funds(tree, strategy, initial)?;
    verdict_for(&evolved, kind, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRatioCheck {
    pub funds: Vec<FundId>,
    /// Per fund, the largest `|E[w(child) / w(v+)] - 1|` over internal nodes.
    pub max_residual: Vec<f64>,
    pub worst_node: Vec<Option<NodeId>>,
    pub tol: f64,
}

impl UnitRatioCheck {
    pub fn passed(&self) -> bool {
        self.max_residual.iter().all(|r| *r <= self.tol)
    }
}

/// Checks `E[w_i(t+1) / w_i(t+) | F_t] = 1` for every fund at every node.
pub fn verify_unit_ratio_identity(
    tree: &ScenarioTree,
    strategy: &StrategySpec,
    initial: &[InitialFund],
    tol: f64,
) -> Result<UnitRatioCheck> {
    let evolved = evolve_funds(tree, strategy, initial)?;
    let n = initial.len();
    let mut max_residual = vec![0.0f64; n];
    let mut worst_node = vec![None; n];
    for v in tree.internal_nodes() {
        let here = evolved.states(v);
        for i in 0..n {
            let mean: f64 = tree
                .children(v)
                .iter()
                .map(|&c| tree.node(c).prob * evolved.states(c)[i].value / here[i].post_value)
                .sum();
            let r = (mean - 1.0).abs();
            if worst_node[i].is_none() || r > max_residual[i] {
                max_residual[i] = r;
                worst_node[i] = Some(v);
            }
        }
    }
    Ok(UnitRatioCheck {
        funds: evolved.fund_ids().to_vec(),
        max_residual,
        worst_node,
        tol,
    })
}
