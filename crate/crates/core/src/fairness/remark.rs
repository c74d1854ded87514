//! Bias of the span-based index when every fund is a fair game.
//!
//! With equal constant unit counts, `w_i(0) = 1` and buy-and-hold portfolios,
//! `r̄_PL(0, t) = Σ w_i / 2n − 1 + ½ Σ w_i² / Σ w_i`. Its expectation is
//! non-negative and vanishes only when all unit values coincide almost surely.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::index_rpl;
use crate::ledger::{FundLedger, GroupHistory};
use crate::scenario::{NodeId, ScenarioTree};

const SETTING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RplBias {
    pub horizon: usize,
    pub n_funds: usize,
    /// Expectation of the closed form over the nodes at depth `horizon`.
    pub expectation: f64,
    /// Expectation of [`index_rpl`] evaluated on each path.
    pub direct: f64,
    /// Probability that all unit values coincide at `horizon`.
    pub prob_all_equal: f64,
    /// True when the expectation is strictly positive.
    pub strict: bool,
}

/// The closed form for one outcome of the unit values.
pub fn rpl_closed_form(w: &[f64]) -> f64 {
    let n = w.len() as f64;
    let sum: f64 = w.iter().sum();
    let sq: f64 = w.iter().map(|x| x * x).sum();
    sum / (2.0 * n) - 1.0 + 0.5 * sq / sum
}

fn unit_values(tree: &ScenarioTree, holdings: &[Vec<f64>], units: f64, node: NodeId) -> Vec<f64> {
    let prices = &tree.node(node).prices;
    holdings
        .iter()
        .map(|h| h.iter().zip(prices).map(|(u, c)| u * c).sum::<f64>() / units)
        .collect()
}

/// `holdings[i][j]` is the fixed quantity of asset `j` held by fund `i`;
/// every fund has `units` units throughout.
pub fn rpl_bias_demo(tree: &ScenarioTree, holdings: &[Vec<f64>], units: f64, t: usize) -> Result<RplBias> {
    let violated = |m: String| Err(Error::SettingViolated(m));
    if holdings.is_empty() {
        return violated("no funds".into());
    }
    if !(units > 0.0 && units.is_finite()) {
        return violated(format!("unit count {units} must be positive"));
    }
    if t > tree.horizon() {
        return Err(Error::TimeOutOfRange {
            time: t,
            max: tree.horizon(),
        });
    }
    if let Some(h) = holdings.iter().find(|h| h.len() != tree.n_assets()) {
        return violated(format!("{} holdings for {} assets", h.len(), tree.n_assets()));
    }
    let w0 = unit_values(tree, holdings, units, tree.root());
    if let Some(w) = w0.iter().find(|w| (*w - 1.0).abs() > SETTING_TOL) {
        return violated(format!("initial unit value {w} differs from 1"));
    }

    let n = holdings.len();
    let nodes: Vec<NodeId> = tree.nodes_at_depth(t).collect();
    let mut means = vec![0.0; n];
    let mut expectation = 0.0;
    let mut direct = 0.0;
    let mut prob_all_equal = 0.0;
    for &v in &nodes {
        let p = tree.path_probability(v);
        let path = tree.path_to(v);
        let series: Vec<Vec<f64>> = path.iter().map(|&x| unit_values(tree, holdings, units, x)).collect();
        let w = series.last().expect("path is not empty");
        if w.iter().any(|x| !(*x > 0.0)) {
            return violated(format!("non-positive unit value at node {v}"));
        }
        for (m, x) in means.iter_mut().zip(w) {
            *m += p * x;
        }
        expectation += p * rpl_closed_form(w);
        if w.iter().all(|x| (x - w[0]).abs() <= SETTING_TOL) {
            prob_all_equal += p;
        }
        let funds = (0..n)
            .map(|i| {
                let values: Vec<f64> = series.iter().map(|row| row[i]).collect();
                FundLedger::from_series(format!("{}", i + 1), &vec![units; values.len()], &values)
            })
            .collect::<Result<Vec<_>>>()?;
        direct += p * index_rpl(&GroupHistory::new(funds, None)?, 0, t)?;
    }
    if let Some(m) = means.iter().find(|m| (*m - 1.0).abs() > SETTING_TOL) {
        return violated(format!("expected unit value {m} differs from 1"));
    }
    Ok(RplBias {
        horizon: t,
        n_funds: n,
        expectation,
        direct,
        prob_all_equal,
        strict: prob_all_equal < 1.0 - SETTING_TOL,
    })
}
