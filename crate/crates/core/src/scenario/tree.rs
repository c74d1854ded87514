//! Finite filtered probability spaces.
//!
//! A node at depth `t` is an atom of the information available at time `t`.
//! Conditional expectations given that information are finite sums over the
//! node's children.

use serde::{Deserialize, Serialize};

use super::model::PathModel;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Maximum node-asset count accepted by [`build_tree`].
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub depth: usize,
    pub parent: Option<NodeId>,
    /// Probability of reaching this node given its parent.
    pub prob: f64,
    pub prices: Vec<f64>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTree {
    asset_ids: Vec<String>,
    nodes: Vec<Node>,
    horizon: usize,
}

impl ScenarioTree {
    /// Validates a hand-built tree. Node 0 must be the root; children must
    /// follow their parent in the vector.
    pub fn from_nodes(asset_ids: Vec<String>, nodes: Vec<Node>) -> Result<Self> {
        let root = nodes
            .first()
            .ok_or_else(|| Error::InvalidModel("tree has no nodes".into()))?;
        if root.parent.is_some() || root.depth != 0 {
            return Err(Error::InvalidModel("node 0 must be the root".into()));
        }
        let horizon = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
        for (id, n) in nodes.iter().enumerate() {
            if n.prices.len() != asset_ids.len() || n.prices.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(Error::InvalidModel(format!("node {id}: invalid price vector")));
            }
            if let Some(p) = n.parent {
                if p >= id || nodes[p].depth + 1 != n.depth || !nodes[p].children.contains(&id) {
                    return Err(Error::InvalidModel(format!("node {id}: inconsistent parent link")));
                }
            }
            if n.children.is_empty() {
                if n.depth != horizon {
                    return Err(Error::InvalidModel(format!("leaf {id} is not at depth {horizon}")));
                }
            } else {
                let sum: f64 = n.children.iter().map(|&c| nodes[c].prob).sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidModel(format!(
                        "children of node {id} have total probability {sum}"
                    )));
                }
                if n.children
                    .iter()
                    .any(|&c| c >= nodes.len() || nodes[c].parent != Some(id))
                {
                    return Err(Error::InvalidModel(format!("node {id}: inconsistent child link")));
                }
            }
        }
        Ok(Self {
            asset_ids,
            nodes,
            horizon,
        })
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].children.is_empty())
    }

    pub fn nodes_at_depth(&self, t: usize) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].depth == t)
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes_at_depth(self.horizon)
    }

    /// Node ids from the root down to `id`, inclusive.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Unconditional probability of reaching `id`.
    pub fn path_probability(&self, id: NodeId) -> f64 {
        self.path_to(id).iter().map(|&n| self.nodes[n].prob).product()
    }

    pub fn total_leaf_probability(&self) -> f64 {
        self.leaves().map(|l| self.path_probability(l)).sum()
    }
}

/// Builds the full (non-recombining) tree of `model` up to its horizon.
pub fn build_tree(model: &PathModel) -> Result<ScenarioTree> {
    build_tree_with_budget(model, DEFAULT_NODE_BUDGET)
}

pub fn build_tree_with_budget(model: &PathModel, budget: usize) -> Result<ScenarioTree> {
    let outcomes = model.joint_outcomes();
    let b = outcomes.len();
    let n_assets = model.n_assets();
    let mut count: usize = 0;
    let mut level: usize = 1;
    for _ in 0..=model.horizon {
        count = count.saturating_add(level);
        level = level.saturating_mul(b);
    }
    let needed = count.saturating_mul(n_assets);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    let mut nodes = Vec::with_capacity(count);
    nodes.push(Node {
        depth: 0,
        parent: None,
        prob: 1.0,
        prices: model.initial.clone(),
        children: Vec::new(),
    });
    let mut frontier = vec![0];
    for depth in 1..=model.horizon {
        let mut next = Vec::with_capacity(frontier.len() * b);
        for &parent in &frontier {
            for o in &outcomes {
                let prices = nodes[parent]
                    .prices
                    .iter()
                    .zip(&o.factors)
                    .map(|(c, f)| c * f)
                    .collect();
                let id = nodes.len();
                nodes.push(Node {
                    depth,
                    parent: Some(parent),
                    prob: o.prob,
                    prices,
                    children: Vec::new(),
                });
                nodes[parent].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(ScenarioTree {
        asset_ids: model.asset_ids.clone(),
        nodes,
        horizon: model.horizon,
    })
}

/// `E[X(t+1) | node]` for a payoff defined on the children of `node`.
pub fn conditional_expectation(
    tree: &ScenarioTree,
    node: NodeId,
    payoff: impl Fn(NodeId) -> Option<f64>,
) -> Result<f64> {
    let children = tree.children(node);
    if children.is_empty() {
        return Err(Error::MissingPayoff { node });
    }
    let mut acc = 0.0;
    for &c in children {
        let x = payoff(c).ok_or(Error::MissingPayoff { node: c })?;
        acc += tree.node(c).prob * x;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessClass {
    Martingale,
    Submartingale,
    Supermartingale,
    None,
}

/// `δ(node) = E[X(t+1) | node] - X(node)` at every internal node.
pub fn conditional_drifts(tree: &ScenarioTree, process: impl Fn(NodeId) -> f64) -> Vec<(NodeId, f64)> {
    tree.internal_nodes()
        .map(|n| {
            let mean: f64 = tree.children(n).iter().map(|&c| tree.node(c).prob * process(c)).sum();
            (n, mean - process(n))
        })
        .collect()
}

pub fn classify_drifts(drifts: &[(NodeId, f64)], tol: f64) -> ProcessClass {
    if drifts.iter().all(|(_, d)| d.abs() <= tol) {
        ProcessClass::Martingale
    } else if drifts.iter().all(|(_, d)| *d >= -tol) {
        ProcessClass::Submartingale
    } else if drifts.iter().all(|(_, d)| *d <= tol) {
        ProcessClass::Supermartingale
    } else {
        ProcessClass::None
    }
}

pub fn classify_process(tree: &ScenarioTree, process: impl Fn(NodeId) -> f64, tol: f64) -> ProcessClass {
    classify_drifts(&conditional_drifts(tree, process), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::model::{JointOutcome, Outcome};

    fn binomial(up: f64, down: f64, horizon: usize) -> ScenarioTree {
        let m = PathModel::independent(
            vec![1.0],
            vec![vec![
                Outcome { factor: up, prob: 0.5 },
                Outcome {
                    factor: down,
                    prob: 0.5,
                },
            ]],
            horizon,
        )
        .unwrap();
        build_tree(&m).unwrap()
    }

    #[test]
    fn binomial_leaves() {
        let tree = binomial(1.2, 0.8, 2);
        let mut leaves: Vec<f64> = tree.leaves().map(|l| tree.node(l).prices[0]).collect();
        leaves.sort_by(|a, b| b.total_cmp(a));
        let expected = [1.44, 0.96, 0.96, 0.64];
        for (a, b) in leaves.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((tree.total_leaf_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_factor_keeps_prices() {
        let m = PathModel::independent(vec![3.0], vec![vec![Outcome { factor: 1.0, prob: 1.0 }]], 3).unwrap();
        let tree = build_tree(&m).unwrap();
        assert_eq!(tree.len(), 4);
        assert!(tree.nodes().iter().all(|n| n.prices == vec![3.0]));
    }

    #[test]
    fn two_assets_product_probabilities() {
        let coin = vec![Outcome { factor: 1.1, prob: 0.5 }, Outcome { factor: 0.9, prob: 0.5 }];
        let m = PathModel::independent(vec![1.0, 1.0], vec![coin.clone(), coin], 1).unwrap();
        let tree = build_tree(&m).unwrap();
        assert_eq!(tree.children(0).len(), 4);
        assert!(tree.children(0).iter().all(|&c| tree.node(c).prob == 0.25));
    }

    #[test]
    fn zero_probability_branches_are_pruned() {
        let m = PathModel::joint(
            vec![1.0],
            vec![
                JointOutcome {
                    factors: vec![1.5],
                    prob: 0.0,
                },
                JointOutcome {
                    factors: vec![1.0],
                    prob: 1.0,
                },
            ],
            2,
        )
        .unwrap();
        assert_eq!(build_tree(&m).unwrap().len(), 3);
    }

    #[test]
    fn budget_guard() {
        let coin = vec![Outcome { factor: 1.1, prob: 0.5 }, Outcome { factor: 0.9, prob: 0.5 }];
        let m = PathModel::independent(vec![1.0], vec![coin], 30).unwrap();
        assert!(matches!(build_tree(&m), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn expectations() {
        let tree = binomial(1.2, 0.8, 1);
        assert_eq!(conditional_expectation(&tree, 0, |_| Some(7.0)).unwrap(), 7.0);
        let e = conditional_expectation(&tree, 0, |c| Some(tree.node(c).prices[0])).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
        assert!(matches!(
            conditional_expectation(&tree, 0, |c| (c == 1).then_some(1.0)),
            Err(Error::MissingPayoff { node: 2 })
        ));
        assert!(matches!(
            conditional_expectation(&tree, 1, |_| Some(1.0)),
            Err(Error::MissingPayoff { node: 1 })
        ));
    }

    #[test]
    fn classification() {
        let tree = binomial(1.2, 0.8, 3);
        assert_eq!(classify_process(&tree, |_| 4.0, 1e-9), ProcessClass::Martingale);
        assert_eq!(
            classify_process(&tree, |n| tree.node(n).prices[0], 1e-12),
            ProcessClass::Martingale
        );
        assert_eq!(
            classify_process(&tree, |n| tree.node(n).depth as f64, 1e-9),
            ProcessClass::Submartingale
        );
        assert_eq!(
            classify_process(&tree, |n| -(tree.node(n).depth as f64), 1e-9),
            ProcessClass::Supermartingale
        );
        let sub = binomial(1.3, 0.9, 3);
        let drifts = conditional_drifts(&sub, |n| sub.node(n).prices[0]);
        for (n, d) in &drifts {
            assert!((d - 0.1 * sub.node(*n).prices[0]).abs() < 1e-12);
        }
        assert_eq!(classify_drifts(&drifts, 1e-9), ProcessClass::Submartingale);
        assert_eq!(
            classify_process(&tree, |n| if n % 2 == 0 { 1.0 } else { -1.0 }, 1e-9),
            ProcessClass::None
        );
    }

    #[test]
    fn hand_built_tree_validation() {
        let ids = vec!["X".to_string()];
        let node = |depth, parent, prob, children: Vec<usize>| Node {
            depth,
            parent,
            prob,
            prices: vec![1.0],
            children,
        };
        let ok = vec![
            node(0, None, 1.0, vec![1, 2]),
            node(1, Some(0), 0.3, vec![]),
            node(1, Some(0), 0.7, vec![]),
        ];
        assert!(ScenarioTree::from_nodes(ids.clone(), ok).is_ok());
        let bad = vec![
            node(0, None, 1.0, vec![1, 2]),
            node(1, Some(0), 0.3, vec![]),
            node(1, Some(0), 0.6, vec![]),
        ];
        assert!(ScenarioTree::from_nodes(ids, bad).is_err());
    }
}
