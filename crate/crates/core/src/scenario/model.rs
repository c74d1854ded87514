use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub factor: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointOutcome {
    pub factors: Vec<f64>,
    pub prob: f64,
}

/// One-period multiplicative price factors, i.i.d. over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FactorLaw {
    /// Assets move independently; one outcome table per asset.
    Independent(Vec<Vec<Outcome>>),
    /// Assets move jointly; each outcome carries a factor per asset.
    Joint(Vec<JointOutcome>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftClass {
    Martingale,
    Submartingale,
    Supermartingale,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathModel {
    pub asset_ids: Vec<String>,
    pub initial: Vec<f64>,
    pub law: FactorLaw,
    pub horizon: usize,
}

fn check_probs(probs: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut sum = 0.0;
    for p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!("{what}: probability {p} outside [0, 1]")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidModel(format!("{what}: probabilities sum to {sum}")));
    }
    Ok(())
}

fn check_factor(f: f64, what: &str) -> Result<()> {
    if f.is_finite() && f > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{what}: factor {f} must be positive")))
    }
}

impl PathModel {
    pub fn new(asset_ids: Vec<String>, initial: Vec<f64>, law: FactorLaw, horizon: usize) -> Result<Self> {
        if initial.is_empty() || asset_ids.len() != initial.len() {
            return Err(Error::InvalidModel(
                "need one id and one initial price per asset".into(),
            ));
        }
        if let Some(c) = initial.iter().find(|c| !c.is_finite() || **c <= 0.0) {
            return Err(Error::InvalidModel(format!("initial price {c} must be positive")));
        }
        let n = initial.len();
        match &law {
            FactorLaw::Independent(tables) => {
                if tables.len() != n {
                    return Err(Error::InvalidModel(format!(
                        "{} factor tables for {n} assets",
                        tables.len()
                    )));
                }
                for (j, table) in tables.iter().enumerate() {
                    let what = format!("asset {}", asset_ids[j]);
                    if table.is_empty() {
                        return Err(Error::InvalidModel(format!("{what}: no outcomes")));
                    }
                    for o in table {
                        check_factor(o.factor, &what)?;
                    }
                    check_probs(table.iter().map(|o| o.prob), &what)?;
                }
            }
            FactorLaw::Joint(outcomes) => {
                if outcomes.is_empty() {
                    return Err(Error::InvalidModel("joint law has no outcomes".into()));
                }
                for o in outcomes {
                    if o.factors.len() != n {
                        return Err(Error::InvalidModel(format!(
                            "joint outcome has {} factors for {n} assets",
                            o.factors.len()
                        )));
                    }
                    for f in &o.factors {
                        check_factor(*f, "joint outcome")?;
                    }
                }
                check_probs(outcomes.iter().map(|o| o.prob), "joint law")?;
            }
        }
        Ok(Self {
            asset_ids,
            initial,
            law,
            horizon,
        })
    }

    /// Independent assets with default ids `A1`, `A2`, ...
    pub fn independent(initial: Vec<f64>, tables: Vec<Vec<Outcome>>, horizon: usize) -> Result<Self> {
        let ids = (1..=initial.len()).map(|j| format!("A{j}")).collect();
        Self::new(ids, initial, FactorLaw::Independent(tables), horizon)
    }

    pub fn joint(initial: Vec<f64>, outcomes: Vec<JointOutcome>, horizon: usize) -> Result<Self> {
        let ids = (1..=initial.len()).map(|j| format!("A{j}")).collect();
        Self::new(ids, initial, FactorLaw::Joint(outcomes), horizon)
    }

    pub fn n_assets(&self) -> usize {
        self.initial.len()
    }

    /// One-period outcomes with positive probability, in a fixed order.
    ///
    /// For independent assets this is the product of the marginal tables,
    /// enumerated with the last asset varying fastest.
    pub fn joint_outcomes(&self) -> Vec<JointOutcome> {
        match &self.law {
            FactorLaw::Joint(outcomes) => outcomes.iter().filter(|o| o.prob > 0.0).cloned().collect(),
            FactorLaw::Independent(tables) => {
                let mut acc = vec![JointOutcome {
                    factors: Vec::with_capacity(tables.len()),
                    prob: 1.0,
                }];
                for table in tables {
                    let mut next = Vec::with_capacity(acc.len() * table.len());
                    for partial in &acc {
                        for o in table.iter().filter(|o| o.prob > 0.0) {
                            let mut factors = partial.factors.clone();
                            factors.push(o.factor);
                            next.push(JointOutcome {
                                factors,
                                prob: partial.prob * o.prob,
                            });
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }

    pub fn branching(&self) -> usize {
        match &self.law {
            FactorLaw::Joint(o) => o.iter().filter(|o| o.prob > 0.0).count(),
            FactorLaw::Independent(tables) => tables
                .iter()
                .map(|t| t.iter().filter(|o| o.prob > 0.0).count())
                .product(),
        }
    }

    /// Expected one-period factor of each asset.
    pub fn factor_means(&self) -> Vec<f64> {
        match &self.law {
            FactorLaw::Independent(tables) => tables
                .iter()
                .map(|t| t.iter().map(|o| o.factor * o.prob).sum())
                .collect(),
            FactorLaw::Joint(outcomes) => (0..self.n_assets())
                .map(|j| outcomes.iter().map(|o| o.factors[j] * o.prob).sum())
                .collect(),
        }
    }

    pub fn factor_variances(&self) -> Vec<f64> {
        let means = self.factor_means();
        match &self.law {
            FactorLaw::Independent(tables) => tables
                .iter()
                .zip(&means)
                .map(|(t, m)| t.iter().map(|o| o.prob * (o.factor - m).powi(2)).sum())
                .collect(),
            FactorLaw::Joint(outcomes) => (0..self.n_assets())
                .map(|j| {
                    outcomes
                        .iter()
                        .map(|o| o.prob * (o.factors[j] - means[j]).powi(2))
                        .sum()
                })
                .collect(),
        }
    }

    pub fn drift_class(&self, tol: f64) -> DriftClass {
        let means = self.factor_means();
        if means.iter().all(|m| (m - 1.0).abs() <= tol) {
            DriftClass::Martingale
        } else if means.iter().all(|m| *m >= 1.0 - tol) {
            DriftClass::Submartingale
        } else if means.iter().all(|m| *m <= 1.0 + tol) {
            DriftClass::Supermartingale
        } else {
            DriftClass::Mixed
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin(up: f64, down: f64) -> Vec<Outcome> {
        vec![
            Outcome { factor: up, prob: 0.5 },
            Outcome {
                factor: down,
                prob: 0.5,
            },
        ]
    }

    #[test]
    fn product_of_marginals() {
        let m = PathModel::independent(vec![1.0, 2.0], vec![coin(1.2, 0.8), coin(1.1, 0.9)], 1).unwrap();
        let joint = m.joint_outcomes();
        assert_eq!(joint.len(), 4);
        assert!(joint.iter().all(|o| o.prob == 0.25));
        assert_eq!(joint[1].factors, vec![1.2, 0.9]);
        assert_eq!(m.drift_class(1e-12), DriftClass::Martingale);
    }

    #[test]
    fn drift_classes() {
        let sub = PathModel::independent(vec![1.0], vec![coin(1.3, 0.9)], 1).unwrap();
        assert_eq!(sub.drift_class(1e-12), DriftClass::Submartingale);
        let sup = PathModel::independent(vec![1.0], vec![coin(1.1, 0.7)], 1).unwrap();
        assert_eq!(sup.drift_class(1e-12), DriftClass::Supermartingale);
        let mixed = PathModel::independent(vec![1.0, 1.0], vec![coin(1.3, 0.9), coin(1.1, 0.7)], 1).unwrap();
        assert_eq!(mixed.drift_class(1e-12), DriftClass::Mixed);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(PathModel::independent(vec![1.0], vec![vec![Outcome { factor: 1.0, prob: 0.9 }]], 1).is_err());
        assert!(PathModel::independent(vec![1.0], vec![coin(1.2, 0.0)], 1).is_err());
        assert!(PathModel::independent(vec![-1.0], vec![coin(1.2, 0.8)], 1).is_err());
        assert!(PathModel::joint(
            vec![1.0, 1.0],
            vec![JointOutcome {
                factors: vec![1.0],
                prob: 1.0
            }],
            1
        )
        .is_err());
    }
}
