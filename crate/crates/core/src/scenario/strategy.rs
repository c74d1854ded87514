//! Adapted fund strategies and their evolution through the state model.
//!
//! A strategy is a set of decisions keyed by tree node, so a decision can only
//! depend on information revealed up to that node. Decisions are expressed as
//! rules (portfolio weights, redemption fractions, contribution rates) that
//! [`evolve_funds`] turns into unit counts, holdings and flows. The sequence
//! at every non-root node is:
//!
//! 1. revalue the held portfolio: `w(t+1) k(t+) = Σ_j u_j(t) c_j(t+1)`;
//! 2. book client reallocation and external flows, updating `k`;
//! 3. rebalance to new holdings at unchanged fund value;
//! 4. optionally split units.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{NodeId, ScenarioTree};
use crate::error::{Error, Result};
use crate::ledger::{FundId, FundLedger, GroupHistory, MarketPath, Observation};

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// Fractions of fund value per asset; must sum to 1. Negative entries are
    /// short positions.
    Weights(Vec<f64>),
    /// Keep the current composition, scaling holdings with the unit count.
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundDecision {
    pub allocation: Allocation,
    /// Fraction of `k(t+)` redeemed by members moving to other funds, in `[0, 1)`.
    #[serde(default)]
    pub withdraw_fraction: f64,
    /// Share of the group's redeemed money that members move into this fund.
    #[serde(default)]
    pub reinvest_share: f64,
    /// External contributions minus drawdowns as a fraction of fund value.
    #[serde(default)]
    pub contribution_rate: f64,
    /// New unit count as a multiple of the current one.
    #[serde(default)]
    pub split_ratio: Option<f64>,
}

impl FundDecision {
    pub fn weights(w: Vec<f64>) -> Self {
        Self {
            allocation: Allocation::Weights(w),
            withdraw_fraction: 0.0,
            reinvest_share: 0.0,
            contribution_rate: 0.0,
            split_ratio: None,
        }
    }

    pub fn hold() -> Self {
        Self {
            allocation: Allocation::Hold,
            ..Self::weights(Vec::new())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrategySpec {
    decisions: BTreeMap<NodeId, Vec<FundDecision>>,
}

impl StrategySpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, decisions: Vec<FundDecision>) {
        self.decisions.insert(node, decisions);
    }

    pub fn get(&self, node: NodeId) -> Option<&[FundDecision]> {
        self.decisions.get(&node).map(Vec::as_slice)
    }

    /// The same decisions at every node of `tree`.
    pub fn uniform(tree: &ScenarioTree, decisions: Vec<FundDecision>) -> Self {
        let mut spec = Self::new();
        for n in 0..tree.len() {
            spec.insert(n, decisions.clone());
        }
        spec
    }

    /// Root decisions, then `rest` everywhere else.
    pub fn with_root(tree: &ScenarioTree, root: Vec<FundDecision>, rest: Vec<FundDecision>) -> Self {
        let mut spec = Self::uniform(tree, rest);
        spec.insert(tree.root(), root);
        spec
    }

    fn check(&self, tree: &ScenarioTree, n_funds: usize) -> Result<()> {
        if let Some((&node, _)) = self.decisions.range(tree.len()..).next() {
            return Err(Error::NotAdapted(format!("decision for unknown node {node}")));
        }
        for node in 0..tree.len() {
            match self.decisions.get(&node) {
                None => return Err(Error::NotAdapted(format!("no decision at node {node}"))),
                Some(d) if d.len() != n_funds => {
                    return Err(Error::NotAdapted(format!(
                        "node {node} has {} decisions for {n_funds} funds",
                        d.len()
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialFund {
    pub id: FundId,
    pub units: f64,
    pub unit_value: f64,
}

impl InitialFund {
    pub fn new(id: impl Into<FundId>, units: f64, unit_value: f64) -> Self {
        Self {
            id: id.into(),
            units,
            unit_value,
        }
    }
}

/// State of one fund at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundState {
    pub units: f64,
    pub value: f64,
    pub post_units: f64,
    pub post_value: f64,
    pub split: bool,
    pub holdings: Vec<f64>,
    pub withdrawn: f64,
    pub invested: f64,
    pub net_flow: f64,
}

fn infeasible(node: NodeId, reason: String) -> Error {
    Error::InfeasibleStrategy { node, reason }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn rebalance(
    node: NodeId,
    fund: usize,
    allocation: &Allocation,
    value: f64,
    prices: &[f64],
    previous: Option<(&[f64], f64)>,
) -> Result<Vec<f64>> {
    match allocation {
        Allocation::Weights(w) => {
            if w.len() != prices.len() {
                return Err(infeasible(
                    node,
                    format!("fund {fund}: {} weights for {} assets", w.len(), prices.len()),
                ));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(infeasible(node, format!("fund {fund}: weights sum to {sum}")));
            }
            w.iter()
                .zip(prices)
                .map(|(&wj, &c)| {
                    if wj == 0.0 {
                        Ok(0.0)
                    } else if c > 0.0 {
                        Ok(wj * value / c)
                    } else {
                        Err(infeasible(
                            node,
                            format!("fund {fund}: weight on an asset priced at zero"),
                        ))
                    }
                })
                .collect()
        }
        Allocation::Hold => match previous {
            Some((u, scale)) => Ok(u.iter().map(|x| x * scale).collect()),
            None => Err(infeasible(node, format!("fund {fund}: nothing to hold at the root"))),
        },
    }
}

fn apply_split(node: NodeId, fund: usize, d: &FundDecision, units: f64, value: f64) -> Result<(f64, f64, bool)> {
    match d.split_ratio {
        None => Ok((units, value, false)),
        Some(r) if positive(r) => {
            let post_units = r * units;
            Ok((post_units, units * value / post_units, true))
        }
        Some(r) => Err(infeasible(node, format!("fund {fund}: split ratio {r}"))),
    }
}

pub(crate) fn root_states(
    initial: &[InitialFund],
    prices: &[f64],
    decisions: &[FundDecision],
    node: NodeId,
) -> Result<Vec<FundState>> {
    initial
        .iter()
        .zip(decisions)
        .enumerate()
        .map(|(i, (f, d))| {
            if !positive(f.units) || !positive(f.unit_value) {
                return Err(infeasible(node, format!("fund {}: non-positive initial state", f.id)));
            }
            let holdings = rebalance(node, i, &d.allocation, f.units * f.unit_value, prices, None)?;
            let (post_units, post_value, split) = apply_split(node, i, d, f.units, f.unit_value)?;
            Ok(FundState {
                units: f.units,
                value: f.unit_value,
                post_units,
                post_value,
                split,
                holdings,
                withdrawn: 0.0,
                invested: 0.0,
                net_flow: 0.0,
            })
        })
        .collect()
}

pub(crate) fn child_states(
    prev: &[FundState],
    prices: &[f64],
    decisions: &[FundDecision],
    node: NodeId,
) -> Result<Vec<FundState>> {
    let mut values = Vec::with_capacity(prev.len());
    for (i, p) in prev.iter().enumerate() {
        let held: f64 = p.holdings.iter().zip(prices).map(|(u, c)| u * c).sum();
        let w = held / p.post_units;
        if !positive(w) {
            return Err(infeasible(node, format!("fund {i}: unit value {w}")));
        }
        values.push(w);
    }

    let mut redeemed = 0.0;
    let mut withdrawn = Vec::with_capacity(prev.len());
    for (i, (p, d)) in prev.iter().zip(decisions).enumerate() {
        if !(0.0..1.0).contains(&d.withdraw_fraction) {
            return Err(infeasible(
                node,
                format!("fund {i}: withdraw fraction {}", d.withdraw_fraction),
            ));
        }
        let kw = d.withdraw_fraction * p.post_units;
        redeemed += kw * values[i];
        withdrawn.push(kw);
    }
    if redeemed > 0.0 {
        let shares: f64 = decisions.iter().map(|d| d.reinvest_share).sum();
        if decisions.iter().any(|d| d.reinvest_share < 0.0) || (shares - 1.0).abs() > SUM_TOL {
            return Err(infeasible(node, format!("reinvestment shares sum to {shares}")));
        }
    }

    prev.iter()
        .zip(decisions)
        .enumerate()
        .map(|(i, (p, d))| {
            let w = values[i];
            let ki = if redeemed > 0.0 {
                d.reinvest_share * redeemed / w
            } else {
                0.0
            };
            let net_flow = d.contribution_rate * p.post_units * w;
            let units = p.post_units - withdrawn[i] + ki + net_flow / w;
            if !positive(units) {
                return Err(infeasible(node, format!("fund {i}: unit count {units}")));
            }
            let holdings = rebalance(
                node,
                i,
                &d.allocation,
                units * w,
                prices,
                Some((&p.holdings, units / p.post_units)),
            )?;
            let (post_units, post_value, split) = apply_split(node, i, d, units, w)?;
            Ok(FundState {
                units,
                value: w,
                post_units,
                post_value,
                split,
                holdings,
                withdrawn: withdrawn[i],
                invested: ki,
                net_flow,
            })
        })
        .collect()
}

/// Per-node fund states on a scenario tree.
#[derive(Debug, Clone)]
pub struct EvolvedTree<'a> {
    tree: &'a ScenarioTree,
    ids: Vec<FundId>,
    states: Vec<Vec<FundState>>,
}

impl<'a> EvolvedTree<'a> {
    pub fn tree(&self) -> &'a ScenarioTree {
        self.tree
    }

    pub fn fund_ids(&self) -> &[FundId] {
        &self.ids
    }

    pub fn states(&self, node: NodeId) -> &[FundState] {
        &self.states[node]
    }

    /// The history observed along the path from the root to `node`.
    pub fn path_history(&self, node: NodeId) -> Result<GroupHistory> {
        let path = self.tree.path_to(node);
        let prices = path.iter().map(|&n| self.tree.node(n).prices.clone()).collect();
        let states: Vec<&[FundState]> = path.iter().map(|&n| self.states[n].as_slice()).collect();
        history_from_states(&self.ids, self.tree.asset_ids().to_vec(), prices, &states)
    }
}

pub(crate) fn history_from_states(
    ids: &[FundId],
    asset_ids: Vec<String>,
    prices: Vec<Vec<f64>>,
    states: &[&[FundState]],
) -> Result<GroupHistory> {
    let funds = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let obs = states
                .iter()
                .enumerate()
                .map(|(t, row)| {
                    let s = &row[i];
                    let mut o = Observation::new(s.units, s.value).with_holdings(s.holdings.clone());
                    if s.split {
                        o = o.with_post(s.post_units, s.post_value);
                    }
                    if t > 0 {
                        o = o.with_net_flow(s.net_flow).with_client_flows(s.withdrawn, s.invested);
                    }
                    o
                })
                .collect();
            FundLedger::new(id.clone(), obs)
        })
        .collect::<Result<Vec<_>>>()?;
    GroupHistory::new(funds, Some(MarketPath::new(asset_ids, prices)?))
}

pub fn evolve_funds<'a>(
    tree: &'a ScenarioTree,
    strategy: &StrategySpec,
    initial: &[InitialFund],
) -> Result<EvolvedTree<'a>> {
    if initial.is_empty() {
        return Err(Error::InvalidModel("no funds to evolve".into()));
    }
    strategy.check(tree, initial.len())?;
    let root = tree.root();
    let mut states: Vec<Vec<FundState>> = Vec::with_capacity(tree.len());
    states.push(root_states(
        initial,
        &tree.node(root).prices,
        strategy.get(root).expect("checked"),
        root,
    )?);
    for id in 1..tree.len() {
        let n = tree.node(id);
        let parent = n.parent.expect("non-root node has a parent");
        let next = child_states(&states[parent], &n.prices, strategy.get(id).expect("checked"), id)?;
        states.push(next);
    }
    Ok(EvolvedTree {
        tree,
        ids: initial.iter().map(|f| f.id.clone()).collect(),
        states,
    })
}

/// Runs a time-invariant policy along one market path. `root` is used at
/// time 0, `rest` afterwards.
pub fn evolve_path(
    market: &MarketPath,
    initial: &[InitialFund],
    root: &[FundDecision],
    rest: &[FundDecision],
) -> Result<GroupHistory> {
    if root.len() != initial.len() || rest.len() != initial.len() {
        return Err(Error::NotAdapted("one decision per fund required".into()));
    }
    let mut all = Vec::with_capacity(market.horizon() + 1);
    all.push(root_states(initial, market.prices_at(0), root, 0)?);
    for t in 1..=market.horizon() {
        let next = child_states(&all[t - 1], market.prices_at(t), rest, t)?;
        all.push(next);
    }
    let ids: Vec<FundId> = initial.iter().map(|f| f.id.clone()).collect();
    let rows: Vec<&[FundState]> = all.iter().map(Vec::as_slice).collect();
    let prices = (0..=market.horizon()).map(|t| market.prices_at(t).to_vec()).collect();
    history_from_states(&ids, market.asset_ids().to_vec(), prices, &rows)
}

/// Knobs for [`random_strategy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomStrategyOptions {
    /// Allow one short position per fund, at most 30% of fund value.
    pub allow_short: bool,
    pub flows: bool,
    pub splits: bool,
}

impl Default for RandomStrategyOptions {
    fn default() -> Self {
        Self {
            allow_short: false,
            flows: true,
            splits: true,
        }
    }
}

fn random_weights<R: Rng>(rng: &mut R, n_assets: usize, allow_short: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n_assets).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    if allow_short && n_assets > 1 && rng.gen_bool(0.5) {
        let j = rng.gen_range(0..n_assets);
        let short = rng.gen_range(0.0..0.3);
        let long_total = 1.0 + short;
        let rest: f64 = w.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x).sum();
        for (k, x) in w.iter_mut().enumerate() {
            *x = if k == j { -short } else { *x / rest * long_total };
        }
    }
    w
}

/// A random adapted strategy: every node gets independently drawn decisions.
///
/// With factors in `[0.5, 1.5]` the generated funds keep positive unit
/// values, since shorts are capped at 30% of fund value.
pub fn random_strategy<R: Rng>(
    tree: &ScenarioTree,
    n_funds: usize,
    rng: &mut R,
    opts: RandomStrategyOptions,
) -> StrategySpec {
    let n_assets = tree.n_assets();
    let mut spec = StrategySpec::new();
    for node in 0..tree.len() {
        let mut shares: Vec<f64> = (0..n_funds).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = shares.iter().sum();
        shares.iter_mut().for_each(|s| *s /= total);
        let decisions = (0..n_funds)
            .map(|i| {
                let allocation = if node != tree.root() && rng.gen_bool(0.25) {
                    Allocation::Hold
                } else {
                    Allocation::Weights(random_weights(rng, n_assets, opts.allow_short))
                };
                let (withdraw_fraction, contribution_rate) = if opts.flows && node != tree.root() {
                    (rng.gen_range(0.0..0.3), rng.gen_range(-0.2..0.3))
                } else {
                    (0.0, 0.0)
                };
                let split_ratio =
                    (opts.splits && rng.gen_bool(0.2)).then(|| [0.5, 2.0, 3.0, 10.0][rng.gen_range(0..4)]);
                FundDecision {
                    allocation,
                    withdraw_fraction,
                    reinvest_share: shares[i],
                    contribution_rate,
                    split_ratio,
                }
            })
            .collect();
        spec.insert(node, decisions);
    }
    spec
}
