//! Monte Carlo estimate of the index increments under a time-invariant policy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::{index_series, IndexKind};
use crate::scenario::{evolve_path, simulate_path, FundDecision, InitialFund, PathModel};

/// Paths handled by one work item. Sums are formed per chunk and then added
/// in chunk order, so the result does not depend on the thread count.
const CHUNK: u64 = 4096;

/// A time-invariant fund policy: `root` decisions at time 0, `rest` after.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Policy {
    pub initial: Vec<InitialFund>,
    pub root: Vec<FundDecision>,
    pub rest: Vec<FundDecision>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncrementStat {
    /// Increment `X(0, t+1) - X(0, t)`.
    pub t: usize,
    pub mean: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McFairnessReport {
    pub kind: IndexKind,
    pub seed: u64,
    pub n_paths: u64,
    pub increments: Vec<IncrementStat>,
}

impl McFairnessReport {
    pub fn max_abs_z(&self) -> f64 {
        self.increments.iter().map(|s| s.z.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn z_score(mean: f64, se: f64) -> f64 {
    if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

fn path_increments(model: &PathModel, policy: &Policy, kind: IndexKind, seed: u64, p: u64) -> Result<Vec<f64>> {
    let market = simulate_path(model, seed, p);
    let h = evolve_path(&market, &policy.initial, &policy.root, &policy.rest)?;
    let x = index_series(&h, kind, 0)?.values;
    Ok(x.windows(2).map(|w| w[1] - w[0]).collect())
}

pub fn mc_fairness_test(
    model: &PathModel,
    policy: &Policy,
    kind: IndexKind,
    n_paths: u64,
    seed: u64,
) -> Result<McFairnessReport> {
    if n_paths < 2 {
        return Err(Error::InvalidModel("need at least two paths".into()));
    }
    let horizon = model.horizon;
    let n_chunks = n_paths.div_ceil(CHUNK);
    let sums = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = vec![0.0; horizon];
            let mut s2 = vec![0.0; horizon];
            for p in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                for (t, d) in path_increments(model, policy, kind, seed, p)?.into_iter().enumerate() {
                    s[t] += d;
                    s2[t] += d * d;
                }
            }
            Ok((s, s2))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = n_paths as f64;
    let increments = (0..horizon)
        .map(|t| {
            let sum: f64 = sums.iter().map(|(s, _)| s[t]).sum();
            let sum2: f64 = sums.iter().map(|(_, s2)| s2[t]).sum();
            let mean = sum / n;
            let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
            let std_error = (var / n).sqrt();
            IncrementStat {
                t,
                mean,
                std_error,
                z: z_score(mean, std_error),
            }
        })
        .collect();
    Ok(McFairnessReport {
        kind,
        seed,
        n_paths,
        increments,
    })
}
