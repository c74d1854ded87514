use fundindex_core::indices::{index, index_ra, span_return};
use fundindex_core::io::csv::{assemble, read_funds, read_mergers, write_funds, write_mergers};
use fundindex_core::ledger::ValidationScope;
use fundindex_core::{FundLedger, GroupHistory, IndexKind, MergerEvent};
use proptest::prelude::*;

/// Units and unit values of `n` funds over `0..=horizon`.
fn series(n: usize, horizon: usize) -> impl Strategy<Value = Vec<(Vec<f64>, Vec<f64>)>> {
    let one = (
        prop::collection::vec(1.0f64..1e6, horizon + 1),
        prop::collection::vec(0.5f64..50.0, horizon + 1),
    );
    prop::collection::vec(one, n)
}

fn group() -> impl Strategy<Value = GroupHistory> {
    (1usize..5, 1usize..6)
        .prop_flat_map(|(n, h)| series(n, h))
        .prop_map(|s| {
            let funds = s
                .iter()
                .enumerate()
                .map(|(i, (k, w))| FundLedger::from_series(format!("f{i}"), k, w).unwrap())
                .collect();
            GroupHistory::new(funds, None).unwrap()
        })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chaining_holds_at_every_split_point(h in group()) {
        let t = h.horizon();
        for u in 0..=t {
            let a = index_ra(&h, 0, u).unwrap();
            let b = index_ra(&h, u, t).unwrap();
            let c = index_ra(&h, 0, t).unwrap();
            prop_assert!(rel((1.0 + a) * (1.0 + b) - 1.0, c) < 1e-12);
        }
    }

    #[test]
    fn single_fund_index_is_its_return(h in group()) {
        let f = &h.funds()[0];
        let solo = GroupHistory::new(vec![f.clone()], None).unwrap();
        let r = span_return(f, 0, solo.horizon()).unwrap();
        for kind in IndexKind::ALL {
            prop_assert!(rel(index(&solo, kind, 0, solo.horizon()).unwrap(), r) < 1e-12);
        }
    }

    #[test]
    fn one_period_index_lies_between_fund_returns(h in group()) {
        for u in 0..h.horizon() {
            let returns: Vec<f64> = h.funds().iter().map(|f| span_return(f, u, u + 1).unwrap()).collect();
            let lo = returns.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for kind in IndexKind::ALL {
                let x = index(&h, kind, u, u + 1).unwrap();
                prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12, "{kind}: {x} not in [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn fund_order_does_not_matter(h in group()) {
        let mut funds = h.funds().to_vec();
        funds.reverse();
        let r = GroupHistory::new(funds, None).unwrap();
        for kind in IndexKind::ALL {
            let (a, b) = (index(&h, kind, 0, h.horizon()).unwrap(), index(&r, kind, 0, r.horizon()).unwrap());
            prop_assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn splits_leave_every_index_unchanged(h in group(), ratio in prop::sample::select(vec![0.5, 2.0, 3.0, 10.0])) {
        let t = h.horizon();
        let split_at = t / 2;
        // Later rows of the split fund are recorded in the new denomination.
        let mut funds = h.funds().to_vec();
        let f = &funds[0];
        let k: Vec<f64> = f.observations().iter().enumerate().map(|(v, o)| if v > split_at { o.units * ratio } else { o.units }).collect();
        let w: Vec<f64> = f.observations().iter().enumerate().map(|(v, o)| if v > split_at { o.value / ratio } else { o.value }).collect();
        funds[0] = FundLedger::from_series(f.id().clone(), &k, &w).unwrap();
        let id = funds[0].id().clone();
        let split = GroupHistory::new(funds, None)
            .unwrap()
            .apply_split(&id, split_at, k[split_at] * ratio)
            .unwrap();
        for kind in IndexKind::ALL {
            let (a, b) = (index(&h, kind, 0, t).unwrap(), index(&split, kind, 0, t).unwrap());
            prop_assert!(rel(a, b) < 1e-12, "{kind}: {a} vs {b}");
        }
        let report = split.validate_balance(ValidationScope::Structural, 1e-9).unwrap();
        prop_assert!(report.passed());
    }

    #[test]
    fn merger_survives_csv_round_trip(h in group(), frac in 0.2f64..5.0) {
        prop_assume!(h.funds().len() >= 2 && h.horizon() >= 2);
        let tau = h.horizon() / 2;
        let (a, s) = (h.funds()[1].id().clone(), h.funds()[0].id().clone());
        let event = MergerEvent::new(a, s.clone(), tau.max(1), h.fund(&s).unwrap().units(tau.max(1)).unwrap() * frac);
        let merged = h.apply_merger(&event).unwrap();

        let mut funds_csv = Vec::new();
        write_funds(&merged, &mut funds_csv).unwrap();
        let mut mergers_csv = Vec::new();
        write_mergers(&merged, &mut mergers_csv).unwrap();
        let rows = read_funds(funds_csv.as_slice(), "funds.csv").unwrap();
        let events = read_mergers(mergers_csv.as_slice(), "mergers.csv").unwrap();
        let back = assemble(rows, None, &events).unwrap().history;
        prop_assert_eq!(&back, &merged);

        let t = merged.horizon();
        let direct = index_ra(&merged, 0, t).unwrap();
        let chained = (1.0 + index_ra(&merged, 0, event.time).unwrap()) * (1.0 + index_ra(&merged, event.time, t).unwrap()) - 1.0;
        prop_assert!(rel(direct, chained) < 1e-12);
        for kind in [IndexKind::Rpl, IndexKind::Rv] {
            prop_assert!(index(&merged, kind, 0, t).is_err());
        }
    }

    #[test]
    fn scaling_all_units_leaves_index_unchanged(h in group(), c in 0.01f64..100.0) {
        let scaled: Vec<FundLedger> = h
            .funds()
            .iter()
            .map(|f| {
                let k: Vec<f64> = f.observations().iter().map(|o| o.units * c).collect();
                let w: Vec<f64> = f.observations().iter().map(|o| o.value).collect();
                FundLedger::from_series(f.id().clone(), &k, &w).unwrap()
            })
            .collect();
        let g = GroupHistory::new(scaled, None).unwrap();
        for kind in IndexKind::ALL {
            let (a, b) = (index(&h, kind, 0, h.horizon()).unwrap(), index(&g, kind, 0, g.horizon()).unwrap());
            prop_assert!(rel(a, b) < 1e-12);
        }
    }
}
