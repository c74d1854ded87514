//! Embedded datasets used by the demos and tests.

use crate::error::Result;
use crate::ledger::{FundLedger, GroupHistory, MergerEvent};
use crate::scenario::{build_tree, Outcome, PathModel, ScenarioTree};

/// Five funds over `t = 0..=2`; fund 5 merges into fund 4 at `t = 1`.
pub const MERGER_UNITS: [[f64; 5]; 2] = [[1e6, 9e5, 4e5, 3e5, 2e5], [1e6, 9.2e5, 4.3e5, 3e5, 2.2e5]];
pub const MERGER_VALUES: [[f64; 5]; 2] = [[10.5, 9.4, 4.3, 5.0, 8.5], [10.8, 9.7, 4.4, 5.5, 8.6]];
pub const MERGER_UNITS_T2: [f64; 4] = [1.2e6, 9.4e5, 4.3e5, 6.1e5];
pub const MERGER_VALUES_T2: [f64; 4] = [10.9, 9.6, 4.4, 6.2];
pub const MERGER_TIME: usize = 1;
pub const MERGER_POST_UNITS: f64 = 6e5;

/// Raw ledgers (fund 5 stops at the merger) and the merger event.
pub fn merger_example_raw() -> Result<(Vec<FundLedger>, MergerEvent)> {
    let mut funds = Vec::with_capacity(5);
    for i in 0..5 {
        let mut units = vec![MERGER_UNITS[0][i], MERGER_UNITS[1][i]];
        let mut values = vec![MERGER_VALUES[0][i], MERGER_VALUES[1][i]];
        if i < 4 {
            units.push(MERGER_UNITS_T2[i]);
            values.push(MERGER_VALUES_T2[i]);
        }
        funds.push(FundLedger::from_series(format!("{}", i + 1), &units, &values)?);
    }
    Ok((funds, MergerEvent::new("5", "4", MERGER_TIME, MERGER_POST_UNITS)))
}

/// The five-fund example with the merger applied.
pub fn merger_example_history() -> Result<GroupHistory> {
    let (funds, event) = merger_example_raw()?;
    GroupHistory::with_mergers(funds, None, &[event])
}

/// Three funds with constant units over one period. Assets at the start are
/// `(1, 3, 4)·10^6` and at the end `(1.1, 3.21, a3_end)·10^6`.
pub fn grouping_instance(a3_end: f64) -> Result<GroupHistory> {
    let start = [1e6, 3e6, 4e6];
    let end = [1.1e6, 3.21e6, a3_end];
    let funds = (0..3)
        .map(|i| FundLedger::from_series(format!("{}", i + 1), &[start[i], start[i]], &[1.0, end[i] / start[i]]))
        .collect::<Result<Vec<_>>>()?;
    GroupHistory::new(funds, None)
}

/// One risky asset moving by 1.2 or 0.8 with equal probability and one
/// riskless asset at constant price, both starting at 1.
pub fn two_scenario_tree(horizon: usize) -> Result<ScenarioTree> {
    let model = PathModel::independent(
        vec![1.0, 1.0],
        vec![
            vec![Outcome { factor: 1.2, prob: 0.5 }, Outcome { factor: 0.8, prob: 0.5 }],
            vec![Outcome { factor: 1.0, prob: 1.0 }],
        ],
        horizon,
    )?;
    build_tree(&model)
}
