//! The random-fund reading of the chain-linked index.
//!
//! Investing one unit of money in a fund drawn at each period with
//! probability equal to its asset share yields an expected gross return of
//! `1 + r̄_A(s, t)`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::montecarlo::z_score;
use crate::error::{Error, Result};
use crate::indices::{ra_factors, PeriodFactor};
use crate::ledger::{GroupHistory, Time};
use crate::scenario::stream_rng;

const CHUNK: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub exact: f64,
    pub z: f64,
    pub n_samples: u64,
    pub seed: u64,
}

fn sample(periods: &[PeriodFactor], seed: u64, i: u64) -> f64 {
    let mut rng = stream_rng(seed, i);
    let mut gross = 1.0;
    for p in periods {
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = p.returns.len() - 1;
        for (j, w) in p.weights.iter().enumerate() {
            acc += w;
            if x < acc {
                pick = j;
                break;
            }
        }
        gross *= 1.0 + p.returns[pick];
    }
    gross - 1.0
}

pub fn sampling_interpretation_check(
    h: &GroupHistory,
    s: Time,
    t: Time,
    n_samples: u64,
    seed: u64,
) -> Result<SamplingEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidModel("need at least two samples".into()));
    }
    let periods = ra_factors(h, s, t)?;
    let exact = periods.iter().map(|p| p.factor).product::<f64>() - 1.0;
    // Samples are accumulated as offsets from the first one.
    let shift = sample(&periods, seed, 0);
    let n_chunks = n_samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let d = sample(&periods, seed, i) - shift;
                s1 += d;
                s2 += d * d;
            }
            (s1, s2)
        })
        .collect();
    let n = n_samples as f64;
    let s1: f64 = sums.iter().map(|x| x.0).sum();
    let s2: f64 = sums.iter().map(|x| x.1).sum();
    let mean_offset = s1 / n;
    let var = ((s2 - n * mean_offset * mean_offset) / (n - 1.0)).max(0.0);
    let estimate = shift + mean_offset;
    let std_error = (var / n).sqrt();
    Ok(SamplingEstimate {
        estimate,
        std_error,
        exact,
        z: z_score(estimate - exact, std_error),
        n_samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::merger_example_history;
    use crate::indices::index_ra;
    use crate::ledger::FundLedger;

    #[test]
    fn single_fund_is_exact() {
        let h = GroupHistory::new(
            vec![FundLedger::from_series("a", &[1.0, 2.0, 3.0], &[1.0, 1.1, 0.99]).unwrap()],
            None,
        )
        .unwrap();
        let r = sampling_interpretation_check(&h, 0, 2, 1000, 3).unwrap();
        assert_eq!(r.estimate, index_ra(&h, 0, 2).unwrap());
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn merger_example_within_four_se() {
        let h = merger_example_history().unwrap();
        let r = sampling_interpretation_check(&h, 0, 2, 200_000, 8).unwrap();
        assert!(r.z.abs() < 4.0, "{r:?}");
        assert_eq!(r, sampling_interpretation_check(&h, 0, 2, 200_000, 8).unwrap());
    }
}
