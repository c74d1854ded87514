use serde::Serialize;

use super::{FundId, GroupHistory, Observation, Time};
use crate::error::{Error, Result};

/// Identity checked by [`GroupHistory::validate_balance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// `w(t) k(t) = Σ_j u_j(t) c_j(t)`
    ValueIdentity,
    /// `w(t+) k(t+) = w(t) k(t)`
    SplitConservation,
    /// `k(τ+) w(τ+) = A_survivor(τ) + A_absorbed(τ)`
    MergerConservation,
    /// `k(t+) (w(t+1) - w(t+)) = Σ_j u_j(t) (c_j(t+1) - c_j(t))`
    ValueChange,
    /// `w(t+1) (k(t+1) - k(t+)) = (k^I - k^W) w(t+1) + d(t+1)`
    ClientFlows,
    /// `w(t+1) (k(t+1) - k(t+)) = Σ_j c_j(t+1) (u_j(t+1) - u_j(t))`
    Rebalance,
    /// `Σ_i w_i(t+1) (k_i(t+1) - k_i(t+)) = d(t+1)`
    AggregateFlows,
}

impl Equation {
    pub fn name(&self) -> &'static str {
        match self {
            Equation::ValueIdentity => "value_identity",
            Equation::SplitConservation => "split_conservation",
            Equation::MergerConservation => "merger_conservation",
            Equation::ValueChange => "value_change",
            Equation::ClientFlows => "client_flows",
            Equation::Rebalance => "rebalance",
            Equation::AggregateFlows => "aggregate_flows",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationScope {
    /// Every identity; needs market prices and holdings at every (fund, time).
    Full,
    /// Split/merger conservation and aggregate flows only; needs units and values.
    Structural,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub equation: Equation,
    pub fund: Option<FundId>,
    pub time: Time,
    /// `|lhs - rhs|` divided by the larger of `|lhs|`, `|rhs|` and the assets involved.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub scope: ValidationScope,
    pub tol: f64,
    pub residuals: Vec<Residual>,
    /// Identities that could not be evaluated for lack of recorded data.
    pub skipped: Vec<Equation>,
    /// Aggregate flows were not recorded and were inferred from unit changes.
    pub inferred_flows: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.value < self.tol)
    }

    pub fn worst(&self) -> Option<&Residual> {
        self.residuals.iter().max_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn max_residual(&self, eq: Equation) -> Option<f64> {
        self.residuals
            .iter()
            .filter(|r| r.equation == eq)
            .map(|r| r.value)
            .max_by(f64::total_cmp)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| r.value >= self.tol)
    }
}

fn relative(lhs: f64, rhs: f64, floor: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs()).max(floor.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Report {
    residuals: Vec<Residual>,
    skipped: Vec<Equation>,
}

impl Report {
    fn push(&mut self, equation: Equation, fund: Option<&FundId>, time: Time, value: f64) {
        self.residuals.push(Residual {
            equation,
            fund: fund.cloned(),
            time,
            value,
        });
    }

    fn skip(&mut self, eq: Equation) {
        if !self.skipped.contains(&eq) {
            self.skipped.push(eq);
        }
    }
}

fn holdings<'a>(fund: &FundId, t: Time, o: &'a Observation) -> Result<&'a [f64]> {
    o.holdings
        .as_deref()
        .ok_or_else(|| Error::MissingData(format!("holdings for fund {fund} at time {t}")))
}

pub(super) fn validate(h: &GroupHistory, scope: ValidationScope, tol: f64) -> Result<ValidationReport> {
    let mut rep = Report {
        residuals: Vec::new(),
        skipped: Vec::new(),
    };
    let full = scope == ValidationScope::Full;
    let market = match (full, h.market()) {
        (true, None) => return Err(Error::MissingData("market prices".into())),
        (_, m) => m,
    };
    if full {
        for f in h.funds() {
            for (t, o) in f.observations().iter().enumerate() {
                holdings(f.id(), t, o)?;
            }
        }
    }

    for f in h.funds() {
        let id = f.id();
        let obs = f.observations();
        for (t, o) in obs.iter().enumerate() {
            if let Some(m) = market.filter(|_| full) {
                let u = holdings(id, t, o)?;
                let rhs = dot(u, m.prices_at(t));
                rep.push(Equation::ValueIdentity, Some(id), t, relative(o.assets(), rhs, 0.0));
            }
            let merged_here = h.merger_survivor_at(id, t);
            if let Some(p) = o.post.filter(|_| merged_here.is_none() && f.closed_at() != Some(t)) {
                rep.push(
                    Equation::SplitConservation,
                    Some(id),
                    t,
                    relative(p.units * p.value, o.assets(), 0.0),
                );
            }
            if !f.live_after(t) {
                continue;
            }
            let next = &obs[t + 1];
            let k_plus = o.post_units();
            let w_plus = o.post_value();
            let unit_change = next.value * (next.units - k_plus);

            if let Some(m) = market.filter(|_| full) {
                let mut held = holdings(id, t, o)?.to_vec();
                if let Some(mg) = merged_here {
                    let absorbed = h.fund(&mg.event.absorbed)?;
                    let extra = holdings(absorbed.id(), t, absorbed.obs(t)?)?;
                    for (u, x) in held.iter_mut().zip(extra) {
                        *u += x;
                    }
                }
                let dc: Vec<f64> = m
                    .prices_at(t + 1)
                    .iter()
                    .zip(m.prices_at(t))
                    .map(|(a, b)| a - b)
                    .collect();
                rep.push(
                    Equation::ValueChange,
                    Some(id),
                    t + 1,
                    relative(k_plus * (next.value - w_plus), dot(&held, &dc), k_plus * w_plus),
                );
                let u_next = holdings(id, t + 1, next)?;
                let du: Vec<f64> = u_next.iter().zip(&held).map(|(a, b)| a - b).collect();
                rep.push(
                    Equation::Rebalance,
                    Some(id),
                    t + 1,
                    relative(unit_change, dot(m.prices_at(t + 1), &du), next.assets()),
                );
            }

            match (next.withdrawn, next.invested, next.net_flow) {
                (Some(kw), Some(ki), Some(d)) => {
                    let rhs = (ki - kw) * next.value + d;
                    rep.push(
                        Equation::ClientFlows,
                        Some(id),
                        t + 1,
                        relative(unit_change, rhs, next.assets()),
                    );
                }
                _ => rep.skip(Equation::ClientFlows),
            }
        }
    }

    for mg in h.mergers() {
        let tau = mg.event.time;
        let s = h.fund(&mg.event.survivor)?.obs(tau)?;
        let a = h.fund(&mg.event.absorbed)?.obs(tau)?;
        rep.push(
            Equation::MergerConservation,
            Some(&mg.event.survivor),
            tau,
            relative(s.post_assets(), s.assets() + a.assets(), 0.0),
        );
    }

    let mut inferred = false;
    for t in 1..=h.horizon() {
        let implied = h.aggregate_flows(t)?;
        let recorded: Option<f64> = h.live_after(t - 1).map(|f| f.observations()[t].net_flow).sum();
        let total = h.assets(t)?.total;
        match recorded {
            Some(d) => rep.push(Equation::AggregateFlows, None, t, relative(implied, d, total)),
            None => {
                inferred = true;
                rep.push(Equation::AggregateFlows, None, t, 0.0);
            }
        }
    }

    Ok(ValidationReport {
        scope,
        tol,
        residuals: rep.residuals,
        skipped: rep.skipped,
        inferred_flows: inferred,
    })
}
