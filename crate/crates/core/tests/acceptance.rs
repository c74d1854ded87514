//! Acceptance criteria A1-A9. Runs without the libtest harness so that each
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fundindex_core::fairness::generate::{random_history, random_tree_instance, HistoryShape};
use fundindex_core::fairness::{
    axiom_suite, grouping_cases, replay, rpl_bias_demo, rpl_closed_form, sampling_interpretation_check,
    verify_fairness_exact, verify_unit_ratio_identity, AxiomConfig, Property,
};
use fundindex_core::fixtures::{
    grouping_instance, merger_example_history, two_scenario_tree, MERGER_POST_UNITS, MERGER_UNITS, MERGER_UNITS_T2,
    MERGER_VALUES, MERGER_VALUES_T2,
};
use fundindex_core::indices::{group, index, index_ra, merged_fund_return, GroupingPlan, IndexKind};
use fundindex_core::ledger::{FundId, GroupHistory};
use fundindex_core::scenario::{
    evolve_funds, random_strategy, EvolvedTree, FundDecision, InitialFund, ProcessClass, RandomStrategyOptions,
    StrategySpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Chain-linked asset-weighted index written out directly from the ledger.
fn oracle_ra(h: &GroupHistory, s: usize, t: usize) -> f64 {
    let mut gross = 1.0;
    for u in s..t {
        let mut total = 0.0;
        let mut weighted = 0.0;
        for f in h.funds().iter().filter(|f| f.last_time() > u) {
            let o = &f.observations()[u];
            let (k, w) = o.post.map_or((o.units, o.value), |p| (p.units, p.value));
            total += k * w;
            weighted += k * w * (f.observations()[u + 1].value / w - 1.0);
        }
        gross *= 1.0 + weighted / total;
    }
    gross - 1.0
}

fn a1() -> Outcome {
    let start = Instant::now();
    let h = merger_example_history().map_err(|e| e.to_string())?;
    let (k, w) = (MERGER_UNITS, MERGER_VALUES);

    // w4(1+) from the defining ratio.
    let w_plus_oracle = (k[1][3] * w[1][3] + k[1][4] * w[1][4]) / MERGER_POST_UNITS;
    let w_plus = h.mergers()[0].post_value;

    // Both factors of the chain written out term by term.
    let a0: Vec<f64> = (0..5).map(|i| k[0][i] * w[0][i]).collect();
    let total0: f64 = a0.iter().sum();
    let f0: f64 = (0..5).map(|i| a0[i] / total0 * w[1][i] / w[0][i]).sum();
    let mut a1v: Vec<f64> = (0..3).map(|i| k[1][i] * w[1][i]).collect();
    a1v.push(MERGER_POST_UNITS * w_plus_oracle);
    let total1: f64 = a1v.iter().sum();
    let base = [w[1][0], w[1][1], w[1][2], w_plus_oracle];
    let f1: f64 = (0..4).map(|i| a1v[i] / total1 * MERGER_VALUES_T2[i] / base[i]).sum();
    let ra_oracle = f0 * f1 - 1.0;
    let ra = index_ra(&h, 0, 2).map_err(|e| e.to_string())?;

    let merged_oracle = (a0[3] * (w[1][3] / w[0][3] - 1.0) + a0[4] * (w[1][4] / w[0][4] - 1.0)) / (a0[3] + a0[4]);
    let merged = merged_fund_return(&h, &"4".into(), &"5".into(), 0, 1).map_err(|e| e.to_string())?;
    let naive = ((w[1][3] / w[0][3] - 1.0) + (w[1][4] / w[0][4] - 1.0)) / 2.0;
    let elapsed = start.elapsed();
    let _ = MERGER_UNITS_T2;

    let ok = (w_plus - w_plus_oracle).abs() < 1e-12
        && (w_plus - 5.903_333_333_333_333).abs() < 1e-12
        && (ra - ra_oracle).abs() < 1e-12
        && (ra - 0.040384).abs() <= 1e-4
        && (merged - merged_oracle).abs() < 1e-12
        && (merged - 0.053125).abs() <= 1e-6
        && (naive - 0.0558).abs() <= 1e-4
        && elapsed < Duration::from_secs(1);
    check(
        ok,
        format!(
            "w4(1+)={w_plus:.6} ra(0,2)={ra:.7} (published 0.040384, diff {:.1e}) merged={merged:.6} naive={naive:.5} in {elapsed:?}",
            (ra - 0.040384).abs()
        ),
    )
}

fn rpl_oracle(a_s: [f64; 3], a_t: [f64; 3]) -> f64 {
    let (ts, tt): (f64, f64) = (a_s.iter().sum(), a_t.iter().sum());
    (0..3)
        .map(|i| 0.5 * (a_t[i] / a_s[i] - 1.0) * (a_s[i] / ts + a_t[i] / tt))
        .sum()
}

fn a2() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (a3, published) in [(4.19e6, 0.062646), (4.39e6, 0.087585)] {
        let h = grouping_instance(a3).map_err(|e| e.to_string())?;
        let got = index(&h, IndexKind::Rpl, 0, 1).map_err(|e| e.to_string())?;
        let oracle = rpl_oracle([1e6, 3e6, 4e6], [1.1e6, 3.21e6, a3]);
        ok &= (got - oracle).abs() < 1e-14 && (got - published).abs() <= 5e-5;
        parts.push(format!("{got:.7} (published {published})"));
    }
    check(ok, format!("rpl = {}", parts.join(", ")))
}

fn random_partition<R: Rng>(rng: &mut R, ids: &[FundId]) -> GroupingPlan {
    let nb = rng.gen_range(1..=ids.len());
    let mut blocks = vec![Vec::new(); nb];
    for id in ids {
        blocks[rng.gen_range(0..nb)].push(id.clone());
    }
    blocks.retain(|b: &Vec<FundId>| !b.is_empty());
    GroupingPlan::new(blocks)
}

fn a3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let shape = HistoryShape {
        min_funds: 2,
        mergers: false,
        ..HistoryShape::default()
    };
    let mut worst_ra: f64 = 0.0;
    let mut best_rpl_gap: f64 = 0.0;
    for _ in 0..1000 {
        let h = random_history(&mut rng, &shape).map_err(|e| e.to_string())?;
        let ids: Vec<FundId> = h.funds().iter().map(|f| f.id().clone()).collect();
        let s = rng.gen_range(0..h.horizon());
        let plan = random_partition(&mut rng, &ids);
        let ra_grouped = group(&h, &plan, s, IndexKind::Ra)
            .and_then(|g| g.group_level())
            .map_err(|e| e.to_string())?;
        let ra = oracle_ra(&h, s, s + 1);
        worst_ra = worst_ra.max((ra_grouped - ra).abs() / (1.0 + ra));
        let rpl_grouped = group(&h, &plan, s, IndexKind::Rpl)
            .and_then(|g| g.group_level())
            .map_err(|e| e.to_string())?;
        let rpl = index(&h, IndexKind::Rpl, s, s + 1).map_err(|e| e.to_string())?;
        best_rpl_gap = best_rpl_gap.max((rpl_grouped - rpl).abs());
    }
    let cases = grouping_cases().map_err(|e| e.to_string())?;
    let paper: Vec<String> = cases
        .iter()
        .filter(|c| c.kind == IndexKind::Rpl)
        .map(|c| format!("{:+.2e}", c.difference))
        .collect();
    let paper_nonzero = cases
        .iter()
        .filter(|c| c.kind == IndexKind::Rpl)
        .all(|c| c.difference != 0.0);
    check(
        worst_ra < 1e-12 && best_rpl_gap > 1e-6 && paper_nonzero,
        format!(
            "ra grouping residual {worst_ra:.1e}; largest rpl grouping gap found {best_rpl_gap:.3e}; published instance rpl gaps {}",
            paper.join(" / ")
        ),
    )
}

/// Chain-linked index on every node, computed from fund states.
fn oracle_tree_ra(ev: &EvolvedTree<'_>) -> Vec<f64> {
    let tree = ev.tree();
    let mut x = vec![0.0; tree.len()];
    for v in 1..tree.len() {
        let p = tree.node(v).parent.unwrap();
        let (mut total, mut weighted) = (0.0, 0.0);
        for (a, b) in ev.states(p).iter().zip(ev.states(v)) {
            let assets = a.post_units * a.post_value;
            total += assets;
            weighted += assets * (b.value / a.post_value - 1.0);
        }
        x[v] = (1.0 + x[p]) * (1.0 + weighted / total) - 1.0;
    }
    x
}

fn oracle_drifts(ev: &EvolvedTree<'_>, x: &[f64]) -> Vec<f64> {
    let tree = ev.tree();
    tree.internal_nodes()
        .map(|v| tree.children(v).iter().map(|&c| tree.node(c).prob * x[c]).sum::<f64>() - x[v])
        .collect()
}

fn a4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let opts = RandomStrategyOptions {
        allow_short: true,
        ..RandomStrategyOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut wrong = Vec::new();
    let mut rpl_witness: f64 = 0.0;
    let n = 120;
    for (target, expected) in [
        (1.0, ProcessClass::Martingale),
        (1.05, ProcessClass::Submartingale),
        (0.95, ProcessClass::Supermartingale),
    ] {
        for i in 0..n {
            let inst = random_tree_instance(&mut rng, target).map_err(|e| e.to_string())?;
            let spec = random_strategy(&inst.tree, inst.funds.len(), &mut rng, opts);
            let ev = evolve_funds(&inst.tree, &spec, &inst.funds).map_err(|e| e.to_string())?;
            let x = oracle_tree_ra(&ev);
            let drifts = oracle_drifts(&ev, &x);
            let v = verify_fairness_exact(&inst.tree, &spec, &inst.funds, IndexKind::Ra, 1e-9)
                .map_err(|e| e.to_string())?;
            if v.classification != expected {
                wrong.push(format!("mean {target} instance {i}: {:?}", v.classification));
            }
            if target == 1.0 {
                let oracle_max = drifts.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                worst = worst.max(v.max_violation).max(oracle_max);
                let rpl = verify_fairness_exact(&inst.tree, &spec, &inst.funds, IndexKind::Rpl, 1e-9)
                    .map_err(|e| e.to_string())?;
                rpl_witness = rpl_witness.max(rpl.max_drift);
            } else {
                let sign_ok = drifts.iter().all(|d| if target > 1.0 { *d > 0.0 } else { *d < 0.0 });
                if !sign_ok {
                    wrong.push(format!("mean {target} instance {i}: oracle drift of the wrong sign"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-9 && wrong.is_empty() && elapsed < Duration::from_secs(10) && rpl_witness > 1e-6,
        format!(
            "{n} trees per drift; martingale max violation {worst:.1e}; sub/super misclassified {}; largest rpl drift {rpl_witness:.3e}; {elapsed:?}",
            wrong.len()
        ),
    )
}

fn a5() -> Outcome {
    let tree = two_scenario_tree(1).map_err(|e| e.to_string())?;
    // Both scenarios enumerated: fund 1 ends at 1.2 or 0.8, fund 2 at 1.
    let rpl = |w1: f64| 0.5 * (w1 - 1.0) * (0.5 + w1 / (w1 + 1.0));
    let enumeration = 0.5 * rpl(1.2) + 0.5 * rpl(0.8);
    let closed = 0.5 * rpl_closed_form(&[1.2, 1.0]) + 0.5 * rpl_closed_form(&[0.8, 1.0]);
    let bias = rpl_bias_demo(&tree, &[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0, 1).map_err(|e| e.to_string())?;
    let spec = StrategySpec::uniform(
        &tree,
        vec![
            FundDecision::weights(vec![1.0, 0.0]),
            FundDecision::weights(vec![0.0, 1.0]),
        ],
    );
    let funds = [InitialFund::new("1", 1.0, 1.0), InitialFund::new("2", 1.0, 1.0)];
    let ra = verify_fairness_exact(&tree, &spec, &funds, IndexKind::Ra, 1e-12).map_err(|e| e.to_string())?;
    let rpl_v = verify_fairness_exact(&tree, &spec, &funds, IndexKind::Rpl, 1e-12).map_err(|e| e.to_string())?;
    let ok = (enumeration - 1.0 / 198.0).abs() < 1e-15
        && (closed - enumeration).abs() < 1e-15
        && (bias.expectation - enumeration).abs() < 1e-15
        && (bias.direct - enumeration).abs() < 1e-15
        && (rpl_v.witness_drift - enumeration).abs() < 1e-15
        && ra.witness_drift.abs() < 1e-12
        && ra.classification == ProcessClass::Martingale;
    check(
        ok,
        format!(
            "E rpl(0,1) = {:.10} (enumeration {enumeration:.10}); E ra(0,1) = {:.1e}",
            bias.expectation, ra.witness_drift
        ),
    )
}

fn a6() -> Outcome {
    let cfg = AxiomConfig::default();
    let report = axiom_suite(&cfg).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    for p in [Property::P1, Property::P2, Property::P4, Property::P5, Property::P6] {
        let r = report.get(p, IndexKind::Ra).unwrap();
        if !(r.passed && r.worst_residual < 1e-12 && r.instances >= 1000 - r.skipped && r.instances > 0) {
            problems.push(format!("ra {p:?}: {r:?}"));
        }
    }
    for p in [Property::P3, Property::P7, Property::P8] {
        let r = report.get(p, IndexKind::Ra).unwrap();
        if !r.passed {
            problems.push(format!("ra {p:?}: {:?}", r.counterexample));
        }
    }
    let mut recorded = Vec::new();
    for (p, kind) in [
        (Property::P7, IndexKind::Rv),
        (Property::P2, IndexKind::Rpl),
        (Property::P3, IndexKind::Rpl),
    ] {
        let r = report.get(p, kind).unwrap();
        match &r.counterexample {
            Some(c) => {
                let again = replay(p, kind, c.instance_seed, &cfg);
                if again.as_ref().map(|o| o.holds) != Some(false) {
                    problems.push(format!("{kind} {p:?}: counterexample does not replay"));
                }
                recorded.push(format!(
                    "{kind} {p:?} seed {} residual {:.2e}",
                    c.instance_seed, c.residual
                ));
            }
            None => problems.push(format!("{kind} {p:?}: no counterexample")),
        }
    }
    let p7 = report.get(Property::P7, IndexKind::Ra).unwrap();
    check(
        problems.is_empty(),
        format!(
            "ra checked on P1-P8, {} instances each (P7 worst final residual {:.1e}); recorded: {}{}",
            cfg.instances,
            p7.worst_residual,
            recorded.join("; "),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; problems: {}", problems.join(" | "))
            }
        ),
    )
}

fn a7() -> Outcome {
    let h = merger_example_history().map_err(|e| e.to_string())?;
    let exact = oracle_ra(&h, 0, 2);
    let a = sampling_interpretation_check(&h, 0, 2, 1_000_000, 77).map_err(|e| e.to_string())?;
    let b = sampling_interpretation_check(&h, 0, 2, 1_000_000, 77).map_err(|e| e.to_string())?;
    let z = (a.estimate - exact) / a.std_error;
    check(
        z.abs() < 4.0 && a == b && (a.exact - exact).abs() < 1e-12,
        format!(
            "estimate {:.6} exact {exact:.6} se {:.1e} z {z:+.2}; repeat identical: {}",
            a.estimate,
            a.std_error,
            a == b
        ),
    )
}

fn a8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let opts = RandomStrategyOptions {
        allow_short: true,
        ..RandomStrategyOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut internal = 0usize;
    for _ in 0..120 {
        let inst = random_tree_instance(&mut rng, 1.0).map_err(|e| e.to_string())?;
        let spec = random_strategy(&inst.tree, inst.funds.len(), &mut rng, opts);
        let u = verify_unit_ratio_identity(&inst.tree, &spec, &inst.funds, 1e-9).map_err(|e| e.to_string())?;
        // Independent evaluation of E[w(child) / w(v+)] from the evolved states.
        let ev = evolve_funds(&inst.tree, &spec, &inst.funds).map_err(|e| e.to_string())?;
        let tree = ev.tree();
        for v in tree.internal_nodes() {
            internal += 1;
            for i in 0..inst.funds.len() {
                let m: f64 = tree
                    .children(v)
                    .iter()
                    .map(|&c| tree.node(c).prob * ev.states(c)[i].value / ev.states(v)[i].post_value)
                    .sum();
                worst = worst.max((m - 1.0).abs());
            }
        }
        worst = worst.max(u.max_residual.iter().cloned().fold(0.0, f64::max));
    }
    check(
        worst < 1e-9,
        format!("max |E[w(t+1)/w(t+)] - 1| = {worst:.1e} over {internal} internal nodes"),
    )
}

fn a9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let shape = HistoryShape {
        min_horizon: 2,
        ..HistoryShape::default()
    };
    let mut worst: f64 = 0.0;
    let mut with_mergers = 0;
    let mut triples = 0;
    for _ in 0..1000 {
        let h = random_history(&mut rng, &shape).map_err(|e| e.to_string())?;
        with_mergers += usize::from(!h.mergers().is_empty());
        let t_max = h.horizon();
        for s in 0..t_max {
            for t in s + 2..=t_max {
                let c = index_ra(&h, s, t).map_err(|e| e.to_string())?;
                for u in s + 1..t {
                    let a = index_ra(&h, s, u).map_err(|e| e.to_string())?;
                    let b = index_ra(&h, u, t).map_err(|e| e.to_string())?;
                    worst = worst.max(((1.0 + a) * (1.0 + b) - (1.0 + c)).abs() / (1.0 + c));
                    triples += 1;
                }
            }
        }
    }
    check(
        worst < 1e-12 && with_mergers > 0,
        format!("{triples} split points on 1000 histories ({with_mergers} with mergers); worst relative residual {worst:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("A1 merger example", a1),
        ("A2 span-weighted index instances", a2),
        ("A3 grouping consistency", a3),
        ("A4 exact fairness on trees", a4),
        ("A5 span-weighted index bias", a5),
        ("A6 axiom suite", a6),
        ("A7 random-fund sampling", a7),
        ("A8 unit-ratio identity", a8),
        ("A9 chaining", a9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(msg) => println!("{name}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name}: FAIL  {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
