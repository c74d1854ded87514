//! Discrete-time state of a group of funds.
//!
//! Every fund keeps one [`Observation`] per integer time. An observation holds
//! the unit count `k(t)` and unit value `w(t)` after client flows have been
//! booked, plus an optional post-event state `(k(t+), w(t+))` produced by a
//! unit split or by a merger. Holdings and flow records are optional; the index
//! computations only read units and values.
//!
//! Histories are immutable: [`GroupHistory::apply_split`] and
//! [`GroupHistory::apply_merger`] return new histories.

mod balance;

pub use balance::{Equation, Residual, ValidationReport, ValidationScope};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer time on the observation grid `0..=T`.
pub type Time = usize;

/// Default relative tolerance for balance identities.
pub const DEFAULT_BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FundId(pub String);

impl FundId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FundId {
    fn from(s: &str) -> Self {
        FundId(s.to_string())
    }
}

impl From<String> for FundId {
    fn from(s: String) -> Self {
        FundId(s)
    }
}

/// Asset prices `c_j(t)`, stored row-per-time.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath {
    asset_ids: Vec<String>,
    prices: Vec<Vec<f64>>,
}

impl MarketPath {
    pub fn new(asset_ids: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if asset_ids.is_empty() {
            return Err(Error::InvalidHistory("market needs at least one asset".into()));
        }
        if prices.is_empty() {
            return Err(Error::InvalidHistory("market needs at least one time".into()));
        }
        for (t, row) in prices.iter().enumerate() {
            if row.len() != asset_ids.len() {
                return Err(Error::InvalidHistory(format!(
                    "price row at time {t} has {} entries, expected {}",
                    row.len(),
                    asset_ids.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::InvalidHistory(format!("invalid price {p} at time {t}")));
            }
        }
        Ok(Self { asset_ids, prices })
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn n_assets(&self) -> usize {
        self.asset_ids.len()
    }

    pub fn horizon(&self) -> Time {
        self.prices.len() - 1
    }

    pub fn prices_at(&self, t: Time) -> &[f64] {
        &self.prices[t]
    }

    pub fn price(&self, asset: usize, t: Time) -> f64 {
        self.prices[t][asset]
    }
}

/// State right after a split or merger at time `t`, written `(k(t+), w(t+))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostState {
    pub units: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub units: f64,
    pub value: f64,
    pub post: Option<PostState>,
    /// Units of each market asset held after rebalancing, in market order.
    pub holdings: Option<Vec<f64>>,
    /// Contributions minus drawdowns credited at this time (monetary units).
    pub net_flow: Option<f64>,
    /// Units redeemed by members who move money to other funds of the group.
    pub withdrawn: Option<f64>,
    /// Units issued to members arriving from other funds of the group.
    pub invested: Option<f64>,
}

impl Observation {
    pub fn new(units: f64, value: f64) -> Self {
        Self {
            units,
            value,
            post: None,
            holdings: None,
            net_flow: None,
            withdrawn: None,
            invested: None,
        }
    }

    pub fn with_post(mut self, units: f64, value: f64) -> Self {
        self.post = Some(PostState { units, value });
        self
    }

    pub fn with_holdings(mut self, holdings: Vec<f64>) -> Self {
        self.holdings = Some(holdings);
        self
    }

    pub fn with_net_flow(mut self, d: f64) -> Self {
        self.net_flow = Some(d);
        self
    }

    pub fn with_client_flows(mut self, withdrawn: f64, invested: f64) -> Self {
        self.withdrawn = Some(withdrawn);
        self.invested = Some(invested);
        self
    }

    pub fn post_units(&self) -> f64 {
        self.post.map_or(self.units, |p| p.units)
    }

    pub fn post_value(&self) -> f64 {
        self.post.map_or(self.value, |p| p.value)
    }

    /// `A_i(t) = k(t) w(t)`.
    pub fn assets(&self) -> f64 {
        self.units * self.value
    }

    pub fn post_assets(&self) -> f64 {
        self.post_units() * self.post_value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundLedger {
    id: FundId,
    obs: Vec<Observation>,
    closed_at: Option<Time>,
}

impl FundLedger {
    pub fn new(id: impl Into<FundId>, obs: Vec<Observation>) -> Result<Self> {
        let id = id.into();
        if obs.is_empty() {
            return Err(Error::InvalidHistory(format!("fund {id} has no observations")));
        }
        for (t, o) in obs.iter().enumerate() {
            check_units(&id, t, o.units)?;
            check_value(&id, t, o.value)?;
            if let Some(p) = o.post {
                check_units(&id, t, p.units)?;
                check_value(&id, t, p.value)?;
            }
        }
        Ok(Self {
            id,
            obs,
            closed_at: None,
        })
    }

    /// Ledger without post states, holdings or flows.
    pub fn from_series(id: impl Into<FundId>, units: &[f64], values: &[f64]) -> Result<Self> {
        if units.len() != values.len() {
            return Err(Error::InvalidHistory("units and values series differ in length".into()));
        }
        let obs = units
            .iter()
            .zip(values)
            .map(|(&k, &w)| Observation::new(k, w))
            .collect();
        Self::new(id, obs)
    }

    pub fn id(&self) -> &FundId {
        &self.id
    }

    pub fn observations(&self) -> &[Observation] {
        &self.obs
    }

    /// Last time with an observation.
    pub fn last_time(&self) -> Time {
        self.obs.len() - 1
    }

    /// Time at which the fund was absorbed by a merger, if any.
    pub fn closed_at(&self) -> Option<Time> {
        self.closed_at
    }

    /// The fund exists at `t` (pre-event state).
    pub fn present_at(&self, t: Time) -> bool {
        t <= self.last_time()
    }

    /// The fund carries assets over the period `(u, u+1]`.
    pub fn live_after(&self, u: Time) -> bool {
        u < self.last_time()
    }

    pub fn obs(&self, t: Time) -> Result<&Observation> {
        self.obs.get(t).ok_or(Error::OutOfRange {
            time: t,
            min: 0,
            max: self.last_time(),
        })
    }

    pub fn units(&self, t: Time) -> Result<f64> {
        self.obs(t).map(|o| o.units)
    }

    pub fn value(&self, t: Time) -> Result<f64> {
        self.obs(t).map(|o| o.value)
    }

    pub fn post_units(&self, t: Time) -> Result<f64> {
        self.obs(t).map(Observation::post_units)
    }

    pub fn post_value(&self, t: Time) -> Result<f64> {
        self.obs(t).map(Observation::post_value)
    }

    pub(crate) fn obs_mut(&mut self, t: Time) -> &mut Observation {
        &mut self.obs[t]
    }
}

fn check_units(id: &FundId, t: Time, k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveUnits {
            fund: id.to_string(),
            time: t,
            value: k,
        })
    }
}

fn check_value(id: &FundId, t: Time, w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveValue {
            fund: id.to_string(),
            time: t,
            value: w,
        })
    }
}

/// Asset breakdown of the group at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetSnapshot {
    pub time: Time,
    pub funds: Vec<FundId>,
    pub assets: Vec<f64>,
    pub total: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergerEvent {
    pub absorbed: FundId,
    pub survivor: FundId,
    pub time: Time,
    /// Unit count of the merged fund right after the merger, chosen by the fund.
    pub post_units: f64,
}

impl MergerEvent {
    pub fn new(absorbed: impl Into<FundId>, survivor: impl Into<FundId>, time: Time, post_units: f64) -> Self {
        Self {
            absorbed: absorbed.into(),
            survivor: survivor.into(),
            time,
            post_units,
        }
    }
}

/// A merger recorded in a history, with the derived unit value `w(τ+)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedMerger {
    pub event: MergerEvent,
    pub post_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupHistory {
    funds: Vec<FundLedger>,
    market: Option<MarketPath>,
    mergers: Vec<AppliedMerger>,
    horizon: Time,
}

impl GroupHistory {
    /// All funds must cover the same grid `0..=T`.
    pub fn new(funds: Vec<FundLedger>, market: Option<MarketPath>) -> Result<Self> {
        let horizon = funds.first().map(FundLedger::last_time).unwrap_or(0);
        if let Some(f) = funds.iter().find(|f| f.last_time() != horizon) {
            return Err(Error::InvalidHistory(format!(
                "fund {} ends at {} but the group horizon is {horizon}",
                f.id,
                f.last_time()
            )));
        }
        Self::assemble(funds, market, horizon)
    }

    /// Builds a history in which absorbed funds may stop at their merger time,
    /// then applies the mergers in time order.
    pub fn with_mergers(funds: Vec<FundLedger>, market: Option<MarketPath>, events: &[MergerEvent]) -> Result<Self> {
        let horizon = funds.iter().map(FundLedger::last_time).max().unwrap_or(0);
        for f in &funds {
            if f.last_time() < horizon {
                let absorbed = events.iter().any(|e| e.absorbed == f.id && e.time <= f.last_time());
                if !absorbed {
                    return Err(Error::InvalidHistory(format!(
                        "fund {} ends at {} before the horizon {horizon} without being absorbed",
                        f.id,
                        f.last_time()
                    )));
                }
            }
        }
        let mut history = Self::assemble(funds, market, horizon)?;
        let mut ordered: Vec<&MergerEvent> = events.iter().collect();
        ordered.sort_by_key(|e| e.time);
        for e in ordered {
            history = history.apply_merger(e)?;
        }
        Ok(history)
    }

    fn assemble(funds: Vec<FundLedger>, market: Option<MarketPath>, horizon: Time) -> Result<Self> {
        if funds.is_empty() {
            return Err(Error::InvalidHistory("a group needs at least one fund".into()));
        }
        let mut seen = HashSet::new();
        for f in &funds {
            if !seen.insert(f.id.clone()) {
                return Err(Error::InvalidHistory(format!("duplicate fund id {}", f.id)));
            }
        }
        if let Some(m) = &market {
            if m.horizon() != horizon {
                return Err(Error::InvalidHistory(format!(
                    "market horizon {} differs from fund horizon {horizon}",
                    m.horizon()
                )));
            }
            for f in &funds {
                for (t, o) in f.obs.iter().enumerate() {
                    if let Some(u) = &o.holdings {
                        if u.len() != m.n_assets() {
                            return Err(Error::InvalidHistory(format!(
                                "fund {} holds {} assets at time {t}, market has {}",
                                f.id,
                                u.len(),
                                m.n_assets()
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self {
            funds,
            market,
            mergers: Vec::new(),
            horizon,
        })
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn funds(&self) -> &[FundLedger] {
        &self.funds
    }

    pub fn market(&self) -> Option<&MarketPath> {
        self.market.as_ref()
    }

    pub fn mergers(&self) -> &[AppliedMerger] {
        &self.mergers
    }

    pub fn fund_index(&self, id: &FundId) -> Result<usize> {
        self.funds
            .iter()
            .position(|f| &f.id == id)
            .ok_or_else(|| Error::UnknownFund(id.to_string()))
    }

    pub fn fund(&self, id: &FundId) -> Result<&FundLedger> {
        self.fund_index(id).map(|i| &self.funds[i])
    }

    pub fn check_time(&self, t: Time) -> Result<()> {
        if t > self.horizon {
            Err(Error::OutOfRange {
                time: t,
                min: 0,
                max: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_window(&self, s: Time, t: Time) -> Result<()> {
        self.check_time(t)?;
        if s > t {
            return Err(Error::OutOfRange {
                time: s,
                min: 0,
                max: t,
            });
        }
        Ok(())
    }

    /// Funds that carry assets over `(u, u+1]`, in ledger order.
    pub fn live_after(&self, u: Time) -> impl Iterator<Item = &FundLedger> {
        self.funds.iter().filter(move |f| f.live_after(u))
    }

    /// First merger with `s <= τ < t`.
    pub fn merger_within(&self, s: Time, t: Time) -> Option<&AppliedMerger> {
        self.mergers.iter().find(|m| s <= m.event.time && m.event.time < t)
    }

    pub(crate) fn merger_survivor_at(&self, fund: &FundId, t: Time) -> Option<&AppliedMerger> {
        self.mergers
            .iter()
            .find(|m| m.event.time == t && &m.event.survivor == fund)
    }

    /// `A_i(t)`, `A(t)` and `A*_i(t)` over the funds present at `t`.
    pub fn assets(&self, t: Time) -> Result<AssetSnapshot> {
        self.check_time(t)?;
        let present: Vec<&FundLedger> = self.funds.iter().filter(|f| f.present_at(t)).collect();
        let funds = present.iter().map(|f| f.id.clone()).collect();
        let assets: Vec<f64> = present.iter().map(|f| f.obs[t].assets()).collect();
        let total: f64 = assets.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroTotalAssets { time: t });
        }
        let weights = assets.iter().map(|a| a / total).collect();
        Ok(AssetSnapshot {
            time: t,
            funds,
            assets,
            total,
            weights,
        })
    }

    /// Net external flow `d(t)` implied by unit changes of the whole group.
    ///
    /// Reallocation between funds of the group cancels in the sum, so only
    /// contributions and drawdowns remain.
    pub fn aggregate_flows(&self, t: Time) -> Result<f64> {
        self.check_time(t)?;
        if t == 0 {
            return Err(Error::OutOfRange {
                time: 0,
                min: 1,
                max: self.horizon,
            });
        }
        Ok(self
            .live_after(t - 1)
            .map(|f| {
                let prev = &f.obs[t - 1];
                let cur = &f.obs[t];
                cur.value * (cur.units - prev.post_units())
            })
            .sum())
    }

    /// Re-denominates fund units at `t`; the fund's value is unchanged.
    pub fn apply_split(&self, fund: &FundId, t: Time, new_units: f64) -> Result<Self> {
        let i = self.fund_index(fund)?;
        let f = &self.funds[i];
        let obs = f.obs(t)?;
        if !f.live_after(t) && f.closed_at.is_some() {
            return Err(Error::InvalidEvent(format!(
                "fund {fund} is absorbed at time {t} and cannot split"
            )));
        }
        if self.merger_survivor_at(fund, t).is_some() {
            return Err(Error::InvalidEvent(format!(
                "fund {fund} already has a merger post-state at time {t}"
            )));
        }
        check_units(fund, t, new_units)?;
        let value = obs.units * obs.value / new_units;
        check_value(fund, t, value)?;
        let mut out = self.clone();
        out.funds[i].obs_mut(t).post = Some(PostState {
            units: new_units,
            value,
        });
        Ok(out)
    }

    /// Allocates all assets of `event.absorbed` to `event.survivor` at `τ`.
    ///
    /// The survivor gets a post-state `(k(τ+), w(τ+))` holding the combined
    /// assets, so index code sees the merger as a split of the survivor. The
    /// absorbed ledger ends at `τ`.
    pub fn apply_merger(&self, event: &MergerEvent) -> Result<Self> {
        if event.absorbed == event.survivor {
            return Err(Error::InvalidEvent(format!(
                "fund {} cannot merge with itself",
                event.absorbed
            )));
        }
        let a = self.fund_index(&event.absorbed)?;
        let s = self.fund_index(&event.survivor)?;
        let tau = event.time;
        if tau == 0 || tau >= self.horizon {
            return Err(Error::TimeOutOfRange {
                time: tau,
                max: self.horizon.saturating_sub(1),
            });
        }
        let absorbed = &self.funds[a];
        let survivor = &self.funds[s];
        if absorbed.closed_at.is_some_and(|c| c <= tau) || !absorbed.present_at(tau) {
            return Err(Error::InvalidEvent(format!(
                "fund {} does not exist at time {tau}",
                absorbed.id
            )));
        }
        if survivor.closed_at.is_some() || survivor.last_time() != self.horizon {
            return Err(Error::InvalidEvent(format!(
                "survivor {} must continue to the horizon",
                survivor.id
            )));
        }
        if survivor.obs[tau].post.is_some() {
            return Err(Error::InvalidEvent(format!(
                "survivor {} already has a post-state at time {tau}",
                survivor.id
            )));
        }
        check_units(&survivor.id, tau, event.post_units)?;
        let combined = survivor.obs[tau].assets() + absorbed.obs[tau].assets();
        let post_value = combined / event.post_units;
        check_value(&survivor.id, tau, post_value)?;

        let mut out = self.clone();
        out.funds[s].obs_mut(tau).post = Some(PostState {
            units: event.post_units,
            value: post_value,
        });
        let absorbed = &mut out.funds[a];
        absorbed.obs.truncate(tau + 1);
        absorbed.closed_at = Some(tau);
        out.mergers.push(AppliedMerger {
            event: event.clone(),
            post_value,
        });
        Ok(out)
    }

    /// The history restricted to `[s, t]`, re-based so that `s` becomes time 0.
    ///
    /// Only funds live across the whole window are kept; mergers inside the
    /// window are rejected.
    pub fn window(&self, s: Time, t: Time) -> Result<Self> {
        self.check_window(s, t)?;
        if let Some(m) = self.merger_within(s, t) {
            return Err(Error::MergerInWindow { time: m.event.time });
        }
        let funds = self
            .funds
            .iter()
            .filter(|f| f.present_at(t) && f.present_at(s))
            .map(|f| FundLedger {
                id: f.id.clone(),
                obs: f.obs[s..=t].to_vec(),
                closed_at: None,
            })
            .collect();
        let market = match &self.market {
            Some(m) => Some(MarketPath::new(m.asset_ids.clone(), m.prices[s..=t].to_vec())?),
            None => None,
        };
        Self::assemble(funds, market, t - s)
    }

    /// Sub-group consisting of the given funds, in the order given.
    pub fn subset(&self, ids: &[FundId]) -> Result<Self> {
        let mut funds = Vec::with_capacity(ids.len());
        for id in ids {
            funds.push(self.fund(id)?.clone());
        }
        let mergers = self
            .mergers
            .iter()
            .filter(|m| ids.contains(&m.event.survivor) || ids.contains(&m.event.absorbed))
            .cloned()
            .collect();
        let mut out = Self::assemble(funds, self.market.clone(), self.horizon)?;
        out.mergers = mergers;
        Ok(out)
    }

    /// Balance identities of the state model; see [`ValidationScope`].
    pub fn validate_balance(&self, scope: ValidationScope, tol: f64) -> Result<ValidationReport> {
        balance::validate(self, scope, tol)
    }
}
