//! Random histories and scenario models for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::ledger::{FundLedger, GroupHistory, MergerEvent, Observation};
use crate::scenario::{build_tree, InitialFund, JointOutcome, PathModel, ScenarioTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryShape {
    pub min_funds: usize,
    pub max_funds: usize,
    pub min_horizon: usize,
    pub max_horizon: usize,
    /// Typical unit value.
    pub value_scale: f64,
    pub splits: bool,
    pub mergers: bool,
}

impl Default for HistoryShape {
    fn default() -> Self {
        Self {
            min_funds: 1,
            max_funds: 5,
            min_horizon: 1,
            max_horizon: 6,
            value_scale: 10.0,
            splits: true,
            mergers: true,
        }
    }
}

const SPLIT_RATIOS: [f64; 4] = [0.5, 2.0, 3.0, 10.0];

/// A random history. With `mergers` set, about half of the histories with at
/// least two funds and two periods contain one merger.
pub fn random_history<R: Rng>(rng: &mut R, shape: &HistoryShape) -> Result<GroupHistory> {
    let n = rng.gen_range(shape.min_funds..=shape.max_funds.max(shape.min_funds));
    let horizon = rng.gen_range(shape.min_horizon..=shape.max_horizon.max(shape.min_horizon));
    let merger = (shape.mergers && n >= 2 && horizon >= 2 && rng.gen_bool(0.5)).then(|| {
        let tau = rng.gen_range(1..horizon);
        let mut pick: Vec<usize> = (0..n).collect();
        pick.shuffle(rng);
        (tau, pick[0], pick[1])
    });

    let mut funds = Vec::with_capacity(n);
    for i in 0..n {
        let last = match merger {
            Some((tau, _, absorbed)) if absorbed == i => tau,
            _ => horizon,
        };
        let mut k = rng.gen_range(1e3..1e6);
        let mut w = shape.value_scale * rng.gen_range(0.5..2.0);
        let mut obs = Vec::with_capacity(last + 1);
        for t in 0..=last {
            let mut o = Observation::new(k, w);
            let survivor_at_merger = matches!(merger, Some((tau, s, _)) if s == i && tau == t);
            if shape.splits && t < last && !survivor_at_merger && rng.gen_bool(0.15) {
                let r = *SPLIT_RATIOS.choose(rng).expect("non-empty");
                let post_units = k * r;
                o = o.with_post(post_units, k * w / post_units);
            }
            let (pk, pw) = (o.post_units(), o.post_value());
            obs.push(o);
            k = pk * rng.gen_range(0.9..1.15);
            w = pw * rng.gen_range(0.8..1.25);
        }
        funds.push(FundLedger::new(format!("f{}", i + 1), obs)?);
    }
    let events: Vec<MergerEvent> = match merger {
        Some((tau, s, a)) => {
            let combined = funds[s].observations()[tau].assets() + funds[a].observations()[tau].assets();
            let post_units = combined / funds[s].observations()[tau].value;
            vec![MergerEvent::new(
                funds[a].id().clone(),
                funds[s].id().clone(),
                tau,
                post_units,
            )]
        }
        None => Vec::new(),
    };
    GroupHistory::with_mergers(funds, None, &events)
}

/// A random joint-outcome model whose one-period factors all have mean
/// `factor_mean`.
pub fn random_model<R: Rng>(
    rng: &mut R,
    max_depth: usize,
    max_branching: usize,
    max_assets: usize,
    factor_mean: f64,
) -> Result<PathModel> {
    let depth = rng.gen_range(1..=max_depth);
    let branching = rng.gen_range(2..=max_branching.max(2));
    let n_assets = rng.gen_range(1..=max_assets);
    let probs: Vec<f64> = (0..branching).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = probs.iter().sum();
    let mut outcomes: Vec<JointOutcome> = probs
        .iter()
        .map(|p| JointOutcome {
            factors: (0..n_assets).map(|_| rng.gen_range(0.8..1.2)).collect(),
            prob: p / total,
        })
        .collect();
    // Avoid an exactly constant asset; then rescale each asset to the target mean.
    for j in 0..n_assets {
        if outcomes.iter().all(|o| o.factors[j] == outcomes[0].factors[j]) {
            outcomes[0].factors[j] *= 1.1;
        }
        let mean: f64 = outcomes.iter().map(|o| o.prob * o.factors[j]).sum();
        for o in &mut outcomes {
            o.factors[j] *= factor_mean / mean;
        }
    }
    let initial = (0..n_assets).map(|_| rng.gen_range(0.5..5.0)).collect();
    PathModel::joint(initial, outcomes, depth)
}

pub fn random_funds<R: Rng>(rng: &mut R, max_funds: usize) -> Vec<InitialFund> {
    let n = rng.gen_range(1..=max_funds);
    (0..n)
        .map(|i| InitialFund::new(format!("f{}", i + 1), rng.gen_range(1e2..1e5), rng.gen_range(0.5..20.0)))
        .collect()
}

/// Model, tree and funds for one randomized fairness instance.
#[derive(Debug, Clone)]
pub struct TreeInstance {
    pub model: PathModel,
    pub tree: ScenarioTree,
    pub funds: Vec<InitialFund>,
}

/// Depth ≤ 4, at most 3 branches, 4 assets and 5 funds.
pub fn random_tree_instance<R: Rng>(rng: &mut R, factor_mean: f64) -> Result<TreeInstance> {
    let model = random_model(rng, 4, 3, 4, factor_mean)?;
    let tree = build_tree(&model)?;
    let funds = random_funds(rng, 5);
    Ok(TreeInstance { model, tree, funds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::ValidationScope;
    use crate::scenario::DriftClass;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn histories_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut with_merger = 0;
        for _ in 0..300 {
            let h = random_history(&mut rng, &HistoryShape::default()).unwrap();
            with_merger += usize::from(!h.mergers().is_empty());
            let report = h.validate_balance(ValidationScope::Structural, 1e-9).unwrap();
            assert!(report.passed(), "{:?}", report.worst());
        }
        assert!(with_merger > 50);
    }

    #[test]
    fn models_hit_target_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for target in [1.0, 1.05, 0.95] {
            for _ in 0..50 {
                let m = random_model(&mut rng, 4, 3, 4, target).unwrap();
                for mean in m.factor_means() {
                    assert!((mean - target).abs() < 1e-12);
                }
                let expected = if target == 1.0 {
                    DriftClass::Martingale
                } else if target > 1.0 {
                    DriftClass::Submartingale
                } else {
                    DriftClass::Supermartingale
                };
                assert_eq!(m.drift_class(1e-12), expected);
            }
        }
    }
}
