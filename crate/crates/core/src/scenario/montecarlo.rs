//! Seeded Monte Carlo price paths.
//!
//! Path `p` draws from its own ChaCha stream `(seed, p)`, so any path can be
//! regenerated alone and results do not depend on how paths are spread over
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{FactorLaw, Outcome, PathModel};
use crate::ledger::MarketPath;

/// Random stream for item `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw<R: Rng>(rng: &mut R, probs: impl Iterator<Item = f64>, len: usize) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    len - 1
}

fn draw_outcome<R: Rng>(rng: &mut R, table: &[Outcome]) -> f64 {
    let live: Vec<&Outcome> = table.iter().filter(|o| o.prob > 0.0).collect();
    live[draw(rng, live.iter().map(|o| o.prob), live.len())].factor
}

pub fn simulate_path(model: &PathModel, seed: u64, path: u64) -> MarketPath {
    let mut rng = stream_rng(seed, path);
    let mut prices = Vec::with_capacity(model.horizon + 1);
    prices.push(model.initial.clone());
    let joint = match &model.law {
        FactorLaw::Joint(_) => model.joint_outcomes(),
        FactorLaw::Independent(_) => Vec::new(),
    };
    for t in 1..=model.horizon {
        let prev: &Vec<f64> = &prices[t - 1];
        let next = match &model.law {
            FactorLaw::Independent(tables) => prev
                .iter()
                .zip(tables)
                .map(|(c, table)| c * draw_outcome(&mut rng, table))
                .collect(),
            FactorLaw::Joint(_) => {
                let o = &joint[draw(&mut rng, joint.iter().map(|o| o.prob), joint.len())];
                prev.iter().zip(&o.factors).map(|(c, f)| c * f).collect()
            }
        };
        prices.push(next);
    }
    MarketPath::new(model.asset_ids.clone(), prices).expect("model prices are positive and finite")
}

/// Paths `0..n_paths` of a run seeded with `seed`.
pub fn simulate_paths(model: &PathModel, seed: u64, n_paths: u64) -> impl Iterator<Item = MarketPath> + '_ {
    (0..n_paths).map(move |p| simulate_path(model, seed, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::model::JointOutcome;
    use crate::scenario::tree::build_tree;

    fn coin_model(horizon: usize) -> PathModel {
        PathModel::independent(
            vec![1.0],
            vec![vec![
                Outcome { factor: 1.2, prob: 0.5 },
                Outcome { factor: 0.8, prob: 0.5 },
            ]],
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_paths() {
        let m = coin_model(5);
        let a: Vec<_> = simulate_paths(&m, 42, 50).collect();
        let b: Vec<_> = simulate_paths(&m, 42, 50).collect();
        assert_eq!(a, b);
        let c: Vec<_> = simulate_paths(&m, 43, 50).collect();
        assert_ne!(a, c);
        assert_eq!(simulate_path(&m, 42, 17), a[17]);
    }

    #[test]
    fn single_path_lies_in_tree_support() {
        let m = coin_model(3);
        let tree = build_tree(&m).unwrap();
        let path = simulate_paths(&m, 1, 1).next().unwrap();
        let mut node = tree.root();
        for t in 1..=3 {
            node = *tree
                .children(node)
                .iter()
                .find(|&&c| (tree.node(c).prices[0] - path.price(0, t)).abs() < 1e-12)
                .expect("path leaves the tree");
        }
        assert_eq!(tree.node(node).depth, 3);
    }

    #[test]
    fn joint_law_paths() {
        let m = PathModel::joint(
            vec![1.0, 1.0],
            vec![
                JointOutcome {
                    factors: vec![1.1, 0.9],
                    prob: 0.5,
                },
                JointOutcome {
                    factors: vec![0.9, 1.1],
                    prob: 0.5,
                },
            ],
            4,
        )
        .unwrap();
        for path in simulate_paths(&m, 9, 20) {
            for t in 1..=4 {
                let r0 = path.price(0, t) / path.price(0, t - 1);
                let r1 = path.price(1, t) / path.price(1, t - 1);
                assert!(
                    (r0 - 1.1).abs() < 1e-12 && (r1 - 0.9).abs() < 1e-12
                        || (r0 - 0.9).abs() < 1e-12 && (r1 - 1.1).abs() < 1e-12
                );
            }
        }
    }

    #[test]
    fn martingale_factor_sample_mean() {
        let m = coin_model(1);
        let n = 1_000_000u64;
        let sum: f64 = simulate_paths(&m, 2024, n).map(|p| p.price(0, 1)).sum();
        let mean = sum / n as f64;
        let se = (m.factor_variances()[0] / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}, se {se}");
    }
}
