//! Per-fund returns and group average-rate-of-return indexes.
//!
//! Three indexes are provided:
//!
//! - [`IndexKind::Ra`]: chain-linked, asset-weighted. Each period compounds
//!   `1 + Σ_i A*_i(u) r_i(u, u+1)`, where weights and return bases are taken
//!   after any split or merger at `u`.
//! - [`IndexKind::Rpl`]: span returns weighted by the mean of start and end
//!   asset shares (the regulatory formula used for Polish pension funds).
//! - [`IndexKind::Rv`]: equally weighted geometric mean of unit-value ratios,
//!   in the style of the Value Line composite.
//!
//! `Rpl` and `Rv` are only defined on windows without mergers. Across splits
//! they use split-adjusted unit values, so a 2-for-1 split does not look like
//! a 50% loss.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{FundId, FundLedger, GroupHistory, MergerEvent, Observation, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Ra,
    Rpl,
    Rv,
}

impl IndexKind {
    pub const ALL: [IndexKind; 3] = [IndexKind::Ra, IndexKind::Rpl, IndexKind::Rv];

    pub fn as_str(&self) -> &'static str {
        match self {
            IndexKind::Ra => "ra",
            IndexKind::Rpl => "rpl",
            IndexKind::Rv => "rv",
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ra" => Ok(IndexKind::Ra),
            "rpl" => Ok(IndexKind::Rpl),
            "rv" => Ok(IndexKind::Rv),
            other => Err(Error::InvalidModel(format!("unknown index kind `{other}`"))),
        }
    }
}

/// Index values `X(s, t)` for `t = s..=T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSeries {
    pub kind: IndexKind,
    pub start: Time,
    pub values: Vec<f64>,
}

impl IndexSeries {
    pub fn value_at(&self, t: Time) -> Option<f64> {
        t.checked_sub(self.start).and_then(|i| self.values.get(i).copied())
    }
}

/// Return of a fund over `(u, u+1]`, measured from the post-event value `w(u+)`.
pub fn period_return(fund: &FundLedger, u: Time) -> Result<f64> {
    if !fund.live_after(u) {
        return Err(Error::OutOfRange {
            time: u,
            min: 0,
            max: fund.last_time().saturating_sub(1),
        });
    }
    let base = fund.post_value(u)?;
    Ok((fund.value(u + 1)? - base) / base)
}

fn split_factor(o: &Observation) -> f64 {
    match o.post {
        Some(p) => o.value / p.value,
        None => 1.0,
    }
}

/// `(w(t) - w(s)) / w(s)` with `w(t)` restated in units of time `s`.
///
/// Every post-state in `[s, t)` is treated as a split; callers that must
/// refuse mergers check for them first.
pub fn span_return(fund: &FundLedger, s: Time, t: Time) -> Result<f64> {
    if s > t {
        return Err(Error::OutOfRange {
            time: s,
            min: 0,
            max: t,
        });
    }
    let start = fund.value(s)?;
    let end = fund.value(t)?;
    let adjust: f64 = fund.observations()[s..t].iter().map(split_factor).product();
    Ok((end * adjust - start) / start)
}

/// One factor of the chain-linked product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodFactor {
    pub period: Time,
    pub funds: Vec<FundId>,
    pub weights: Vec<f64>,
    pub returns: Vec<f64>,
    /// `1 + Σ_i weight_i · return_i`
    pub factor: f64,
}

fn ra_factor(h: &GroupHistory, u: Time) -> Result<PeriodFactor> {
    let live: Vec<&FundLedger> = h.live_after(u).collect();
    let assets: Vec<f64> = live.iter().map(|f| f.observations()[u].post_assets()).collect();
    let total: f64 = assets.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ZeroTotalAssets { time: u });
    }
    let weights: Vec<f64> = assets.iter().map(|a| a / total).collect();
    let returns = live.iter().map(|f| period_return(f, u)).collect::<Result<Vec<f64>>>()?;
    let avg: f64 = weights.iter().zip(&returns).map(|(a, r)| a * r).sum();
    Ok(PeriodFactor {
        period: u,
        funds: live.iter().map(|f| f.id().clone()).collect(),
        weights,
        returns,
        factor: 1.0 + avg,
    })
}

/// The product terms of [`index_ra`] over `[s, t]`.
pub fn ra_factors(h: &GroupHistory, s: Time, t: Time) -> Result<Vec<PeriodFactor>> {
    h.check_window(s, t)?;
    (s..t).map(|u| ra_factor(h, u)).collect()
}

pub fn index_ra(h: &GroupHistory, s: Time, t: Time) -> Result<f64> {
    h.check_window(s, t)?;
    let mut gross = 1.0;
    for u in s..t {
        gross *= ra_factor(h, u)?.factor;
    }
    Ok(gross - 1.0)
}

/// Funds present over the whole window, after refusing mergers inside it.
fn span_members(h: &GroupHistory, s: Time, t: Time) -> Result<Vec<&FundLedger>> {
    h.check_window(s, t)?;
    if let Some(m) = h.merger_within(s, t) {
        return Err(Error::MergerInWindow { time: m.event.time });
    }
    Ok(h.funds()
        .iter()
        .filter(|f| f.present_at(t) && f.present_at(s))
        .collect())
}

pub fn index_rpl(h: &GroupHistory, s: Time, t: Time) -> Result<f64> {
    let members = span_members(h, s, t)?;
    if s == t {
        return Ok(0.0);
    }
    let total_s: f64 = members.iter().map(|f| f.observations()[s].assets()).sum();
    let total_t: f64 = members.iter().map(|f| f.observations()[t].assets()).sum();
    if !(total_s > 0.0) {
        return Err(Error::ZeroTotalAssets { time: s });
    }
    if !(total_t > 0.0) {
        return Err(Error::ZeroTotalAssets { time: t });
    }
    let mut acc = 0.0;
    for f in members {
        let obs = f.observations();
        let r = span_return(f, s, t)?;
        acc += 0.5 * r * (obs[s].assets() / total_s + obs[t].assets() / total_t);
    }
    Ok(acc)
}

pub fn index_rv(h: &GroupHistory, s: Time, t: Time) -> Result<f64> {
    let members = span_members(h, s, t)?;
    if s == t {
        return Ok(0.0);
    }
    let mut product = 1.0;
    for f in &members {
        product *= 1.0 + span_return(f, s, t)?;
    }
    Ok(product.powf(1.0 / members.len() as f64) - 1.0)
}

pub fn index(h: &GroupHistory, kind: IndexKind, s: Time, t: Time) -> Result<f64> {
    match kind {
        IndexKind::Ra => index_ra(h, s, t),
        IndexKind::Rpl => index_rpl(h, s, t),
        IndexKind::Rv => index_rv(h, s, t),
    }
}

pub fn index_series(h: &GroupHistory, kind: IndexKind, s: Time) -> Result<IndexSeries> {
    h.check_time(s)?;
    let values = match kind {
        IndexKind::Ra => {
            let mut gross = 1.0;
            let mut v = vec![0.0];
            for u in s..h.horizon() {
                gross *= ra_factor(h, u)?.factor;
                v.push(gross - 1.0);
            }
            v
        }
        _ => (s..=h.horizon()).map(|t| index(h, kind, s, t)).collect::<Result<_>>()?,
    };
    Ok(IndexSeries { kind, start: s, values })
}

/// Compounds index values of adjacent windows: `(1+a)(1+b) - 1`.
pub fn chain(a: f64, b: f64) -> Result<f64> {
    for x in [a, b] {
        if !(x > -1.0) || !x.is_finite() {
            return Err(Error::Domain(x));
        }
    }
    Ok((1.0 + a) * (1.0 + b) - 1.0)
}

/// A partition of the funds of a group into blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingPlan {
    pub blocks: Vec<Vec<FundId>>,
}

impl GroupingPlan {
    pub fn new(blocks: Vec<Vec<FundId>>) -> Self {
        Self { blocks }
    }

    pub fn singletons(h: &GroupHistory) -> Self {
        Self {
            blocks: h.funds().iter().map(|f| vec![f.id().clone()]).collect(),
        }
    }

    fn check(&self, ids: &[&FundId]) -> Result<()> {
        let mut seen: Vec<&FundId> = Vec::new();
        for block in &self.blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for id in block {
                if seen.contains(&id) {
                    return Err(Error::InvalidPartition(format!("fund {id} appears twice")));
                }
                if !ids.contains(&id) {
                    return Err(Error::InvalidPartition(format!(
                        "fund {id} is not part of the group over this period"
                    )));
                }
                seen.push(id);
            }
        }
        if seen.len() != ids.len() {
            return Err(Error::InvalidPartition("blocks do not cover every fund".into()));
        }
        Ok(())
    }
}

/// Block-level view of one period `[s, s+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedPeriod {
    pub kind: IndexKind,
    /// One synthetic fund per block, on the re-based grid `0..=1`. Each has
    /// unit value 1 at time 0, unit value `1 + block return` at time 1, and
    /// the block's total assets at both times.
    pub history: GroupHistory,
    pub block_returns: Vec<f64>,
}

impl GroupedPeriod {
    /// The chosen index recomputed on the block-level history.
    pub fn group_level(&self) -> Result<f64> {
        index(&self.history, self.kind, 0, 1)
    }
}

/// Replaces each block of funds by a synthetic fund whose return is `kind`
/// computed inside the block.
pub fn group(h: &GroupHistory, plan: &GroupingPlan, s: Time, kind: IndexKind) -> Result<GroupedPeriod> {
    let t = s + 1;
    let window = h.window(s, t)?;
    let ids: Vec<&FundId> = window.funds().iter().map(FundLedger::id).collect();
    plan.check(&ids)?;

    let mut synthetic = Vec::with_capacity(plan.blocks.len());
    let mut block_returns = Vec::with_capacity(plan.blocks.len());
    for block in &plan.blocks {
        let sub = window.subset(block)?;
        let r = index(&sub, kind, 0, 1)?;
        let a0: f64 = sub.funds().iter().map(|f| f.observations()[0].assets()).sum();
        let a1: f64 = sub.funds().iter().map(|f| f.observations()[1].assets()).sum();
        let name = block.iter().map(FundId::as_str).collect::<Vec<_>>().join("+");
        let gross = 1.0 + r;
        synthetic.push(FundLedger::from_series(name, &[a0, a1 / gross], &[1.0, gross])?);
        block_returns.push(r);
    }
    Ok(GroupedPeriod {
        kind,
        history: GroupHistory::new(synthetic, None)?,
        block_returns,
    })
}

/// `index_ra` after applying `events` in time order.
pub fn index_ra_with_mergers(h: &GroupHistory, events: &[MergerEvent], s: Time, t: Time) -> Result<f64> {
    let mut ordered: Vec<&MergerEvent> = events.iter().collect();
    ordered.sort_by_key(|e| e.time);
    let mut merged = h.clone();
    for e in ordered {
        merged = merged.apply_merger(e)?;
    }
    index_ra(&merged, s, t)
}

/// Return over `[s, τ]` of a hypothetical fund holding the combined assets of
/// funds `a` and `b`, each period weighted by their asset shares.
pub fn merged_fund_return(h: &GroupHistory, a: &FundId, b: &FundId, s: Time, tau: Time) -> Result<f64> {
    if a == b {
        return Err(Error::InvalidEvent(format!("fund {a} cannot merge with itself")));
    }
    h.check_window(s, tau)?;
    let fa = h.fund(a)?;
    let fb = h.fund(b)?;
    let mut gross = 1.0;
    for u in s..tau {
        let (oa, ob) = (fa.obs(u)?, fb.obs(u)?);
        let (aa, ab) = (oa.post_assets(), ob.post_assets());
        let pair = aa + ab;
        gross *= aa / pair * (1.0 + period_return(fa, u)?) + ab / pair * (1.0 + period_return(fb, u)?);
    }
    Ok(gross - 1.0)
}
