"""Smoke test for the fundindex extension module.

Build and install first:  pip install -e crates/python --no-build-isolation
Then run:                 python python/smoke_test.py
"""

import tempfile
from pathlib import Path

import fundindex


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


# Five funds at t=0,1; fund 5 merges into fund 4 at t=1.
UNITS = [
    [1.0e6, 1.0e6, 1.2e6],
    [9.0e5, 9.2e5, 9.4e5],
    [4.0e5, 4.3e5, 4.3e5],
    [3.0e5, 3.0e5, 6.1e5],
    [2.0e5, 2.2e5],
]
VALUES = [
    [10.5, 10.8, 10.9],
    [9.4, 9.7, 9.6],
    [4.3, 4.4, 4.4],
    [5.0, 5.5, 6.2],
    [8.5, 8.6],
]


def main():
    ids = ["1", "2", "3", "4", "5"]
    pre = fundindex.FundGroup.from_arrays(ids, [u[:2] for u in UNITS], [v[:2] for v in VALUES])
    merged_value = (3e5 * 5.5 + 2.2e5 * 8.6) / 6e5
    assert pre.horizon == 1 and pre.fund_ids == ["1", "2", "3", "4", "5"]
    close(pre.period_return("5", 0), 0.1 / 8.5, 1e-15)
    close(pre.merged_fund_return("4", "5", 0, 1), 0.053125, 1e-12)

    # Fund 5 has no row at t=2; the merger is applied on load.
    with tempfile.TemporaryDirectory() as tmp:
        report = fundindex.demo("merger")
        assert report["passed"], report
        checks = {c["name"]: c for c in report["checks"]}
        close(checks["merged unit value w4(1+)"]["computed"], merged_value, 1e-12)

        funds = Path(tmp) / "funds.csv"
        funds.write_text(
            "time,fund_id,units,unit_value\n"
            + "".join(
                f"{t},{i + 1},{UNITS[i][t]},{VALUES[i][t]}\n"
                for i in range(5)
                for t in range(len(UNITS[i]))
            )
        )
        mergers = Path(tmp) / "mergers.csv"
        mergers.write_text("time,absorbed,survivor,post_units\n1,5,4,600000\n")
        group = fundindex.FundGroup.from_csv(funds, mergers=mergers)
        ra = group.index("ra", 0, 2)
        close(ra, 0.040384, 1e-4)
        series = group.series("ra", 0)
        close((1 + series[1]) * (1 + group.index("ra", 1, 2)) - 1, ra, 1e-14)
        assert group.validate()["passed"]
        try:
            group.index("rv", 0, 2)
        except fundindex.DomainError as e:
            assert "merger" in str(e)
        else:
            raise AssertionError("rv across a merger should fail")

        est = fundindex.sampling_check(group, 0, 2, n_samples=200_000, seed=5)
        assert abs(est["z"]) < 4, est
        assert est == group.sampling_check(0, 2, n_samples=200_000, seed=5)

        written = group.to_csv(Path(tmp) / "out")
        assert any(str(p).endswith("funds.csv") for p in written)

    try:
        fundindex.FundGroup.from_csv("/nonexistent/funds.csv")
    except ValueError:
        pass
    else:
        raise AssertionError("missing file should raise ValueError")

    config = """
horizon = 1
[[assets]]
id = "risky"
initial = 1.0
outcomes = [{ factor = 1.2, prob = 0.5 }, { factor = 0.8, prob = 0.5 }]
[[assets]]
id = "cash"
initial = 1.0
outcomes = [{ factor = 1.0, prob = 1.0 }]
[[funds]]
id = "1"
units = 1.0
unit_value = 1.0
weights = [1.0, 0.0]
[[funds]]
id = "2"
units = 1.0
unit_value = 1.0
weights = [0.0, 1.0]
"""
    fair = fundindex.verify_fairness(config)
    by_kind = {v["kind"]: v for v in fair["verdicts"]}
    assert by_kind["ra"]["classification"] == "martingale"
    close(by_kind["rpl"]["witness_drift"], 1 / 198, 1e-15)

    suite = fundindex.axiom_suite(seed=1, instances=50, properties=["p1", "p2"])
    ra_results = [r for r in suite["results"] if r["kind"] == "ra"]
    assert ra_results and all(r["passed"] for r in ra_results)

    print("smoke test passed:", f"ra(0,2) = {ra:.7f}", f"E rpl = {by_kind['rpl']['witness_drift']:.6f}")


if __name__ == "__main__":
    main()
