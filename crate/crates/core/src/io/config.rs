//! TOML configuration for simulations, fairness checks and the axiom suite.
//!
//! ```toml
//! horizon = 3
//! seed = 7
//! n_paths = 100000
//!
//! [[assets]]
//! id = "equity"
//! initial = 1.0
//! outcomes = [{ factor = 1.2, prob = 0.5 }, { factor = 0.8, prob = 0.5 }]
//!
//! [[assets]]
//! id = "cash"
//! initial = 1.0
//! outcomes = [{ factor = 1.0, prob = 1.0 }]
//!
//! [[funds]]
//! id = "growth"
//! units = 1000.0
//! unit_value = 1.0
//! weights = [0.8, 0.2]
//! hold = true
//! ```
//!
//! Instead of per-asset `outcomes`, a `[joint]` table with
//! `outcomes = [{ factors = [...], prob = ... }]` gives a joint law.
//! Each fund invests with `weights` at time 0; afterwards it either holds
//! (`hold = true`) or rebalances to `rest_weights` (default: `weights`).

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fairness::{AxiomConfig, Policy};
use crate::scenario::{FactorLaw, FundDecision, InitialFund, JointOutcome, Outcome, PathModel};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetConfig {
    pub id: String,
    pub initial: f64,
    #[serde(default)]
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    pub outcomes: Vec<JointOutcome>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundConfig {
    pub id: String,
    pub units: f64,
    pub unit_value: f64,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub hold: bool,
    #[serde(default)]
    pub rest_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub withdraw_fraction: f64,
    #[serde(default)]
    pub reinvest_share: f64,
    #[serde(default)]
    pub contribution_rate: f64,
    #[serde(default)]
    pub split_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_paths: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    pub assets: Vec<AssetConfig>,
    #[serde(default)]
    pub joint: Option<JointConfig>,
    #[serde(default)]
    pub funds: Vec<FundConfig>,
    #[serde(default)]
    pub axioms: Option<AxiomConfig>,
}

fn line_of(text: &str, offset: usize) -> u64 {
    text[..offset.min(text.len())].matches('\n').count() as u64 + 1
}

impl RunConfig {
    pub fn from_toml(text: &str, file: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            file: file.to_string(),
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn model(&self) -> Result<PathModel> {
        let ids = self.assets.iter().map(|a| a.id.clone()).collect();
        let initial = self.assets.iter().map(|a| a.initial).collect();
        let law = match &self.joint {
            Some(j) => {
                if self.assets.iter().any(|a| !a.outcomes.is_empty()) {
                    return Err(Error::InvalidModel(
                        "give either per-asset outcomes or a joint law, not both".into(),
                    ));
                }
                FactorLaw::Joint(j.outcomes.clone())
            }
            None => FactorLaw::Independent(self.assets.iter().map(|a| a.outcomes.clone()).collect()),
        };
        PathModel::new(ids, initial, law, self.horizon)
    }

    pub fn policy(&self) -> Result<Policy> {
        if self.funds.is_empty() {
            return Err(Error::InvalidModel("no [[funds]] configured".into()));
        }
        let mut initial = Vec::with_capacity(self.funds.len());
        let mut root = Vec::with_capacity(self.funds.len());
        let mut rest = Vec::with_capacity(self.funds.len());
        for f in &self.funds {
            initial.push(InitialFund::new(f.id.as_str(), f.units, f.unit_value));
            root.push(FundDecision::weights(f.weights.clone()));
            let base = if f.hold {
                FundDecision::hold()
            } else {
                FundDecision::weights(f.rest_weights.clone().unwrap_or_else(|| f.weights.clone()))
            };
            rest.push(FundDecision {
                withdraw_fraction: f.withdraw_fraction,
                reinvest_share: f.reinvest_share,
                contribution_rate: f.contribution_rate,
                split_ratio: f.split_ratio,
                ..base
            });
        }
        Ok(Policy { initial, root, rest })
    }
}

/// Reads the `[axioms]` table of a TOML file. Other keys are ignored, so
/// the table can live in a run configuration.
pub fn axiom_config_from_toml(text: &str, file: &str) -> Result<AxiomConfig> {
    #[derive(Deserialize)]
    struct Wrapper {
        #[serde(default)]
        axioms: Option<AxiomConfig>,
    }
    let w: Wrapper = toml::from_str(text).map_err(|e| Error::Parse {
        file: file.to_string(),
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    Ok(w.axioms.unwrap_or_default())
}

pub fn load_axiom_config(path: &Path) -> Result<AxiomConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    axiom_config_from_toml(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
horizon = 2
seed = 3

[[assets]]
id = "equity"
initial = 1.0
outcomes = [{ factor = 1.2, prob = 0.5 }, { factor = 0.8, prob = 0.5 }]

[[assets]]
id = "cash"
initial = 1.0
outcomes = [{ factor = 1.0, prob = 1.0 }]

[[funds]]
id = "a"
units = 1.0
unit_value = 1.0
weights = [1.0, 0.0]
hold = true

[[funds]]
id = "b"
units = 1.0
unit_value = 1.0
weights = [0.0, 1.0]
"#;

    #[test]
    fn parses_model_and_policy() {
        let cfg = RunConfig::from_toml(EXAMPLE, "run.toml").unwrap();
        let model = cfg.model().unwrap();
        assert_eq!(model.branching(), 2);
        let p = cfg.policy().unwrap();
        assert_eq!(p.rest[0], FundDecision::hold());
        assert_eq!(p.rest[1], FundDecision::weights(vec![0.0, 1.0]));
    }

    #[test]
    fn axiom_table_overrides_defaults() {
        let cfg = axiom_config_from_toml("horizon = 1\n[axioms]\ninstances = 12\nseed = 5\n", "a.toml").unwrap();
        assert_eq!((cfg.instances, cfg.seed), (12, 5));
        assert_eq!(cfg.tol, AxiomConfig::default().tol);
        assert_eq!(axiom_config_from_toml("", "a.toml").unwrap(), AxiomConfig::default());
    }

    #[test]
    fn syntax_errors_cite_line() {
        let text = "horizon = 2\n[[assets]]\nid = \"x\"\ninitial = oops\n";
        match RunConfig::from_toml(text, "bad.toml") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
