//! Average rates of return for groups of investment funds.
//!
//! The [`ledger`] module holds fund histories (unit counts, unit values,
//! splits, mergers, holdings and flows) and checks their balance identities.
//! [`indices`] computes per-fund returns and three group indexes on top of a
//! history. [`scenario`] builds price models, scenario trees and fund
//! strategies, and [`fairness`] checks whether an index is a fair game when
//! asset prices are.

pub mod demo;
pub mod error;
pub mod fairness;
pub mod fixtures;
pub mod indices;
pub mod io;
pub mod ledger;
pub mod scenario;

pub use error::{Error, Result};
pub use indices::{index, index_series, IndexKind};
pub use ledger::{FundId, FundLedger, GroupHistory, MarketPath, MergerEvent, Observation, Time};
