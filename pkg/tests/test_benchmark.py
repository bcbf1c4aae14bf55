import json
import math

import numpy as np
import pytest

from ghslla.benchmark import (
    REPORT_COLUMNS,
    BenchmarkConfig,
    read_report_csv,
    replicate_data,
    run_benchmark,
    study_grid,
    summarize,
    summary_json,
    write_report_csv,
)
from ghslla.simgen import StructureSpec

SMALL = BenchmarkConfig(
    structure=StructureSpec(kind="hubs", q=10),
    n=40,
    reps=2,
    methods=("lla_horseshoe_cauchy", "lla_horseshoe_laplace", "lla_constant"),
    folds=3,
    grids={"horseshoe": (0.1, 0.3), "constant": (2.0, 8.0)},
    n_starts=3,
)


@pytest.fixture(scope="module")
def small_rows():
    return run_benchmark(SMALL)


def test_config_validation():
    with pytest.raises(ValueError):
        BenchmarkConfig(reps=0)
    with pytest.raises(ValueError):
        BenchmarkConfig(methods=("glasso",))


def test_study_grid():
    g = study_grid("horseshoe", 120)
    assert len(g) == 13 and g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(1.0)
    assert np.allclose(np.diff(np.log10(g)), 1 / 6)
    c = study_grid("constant", 120)
    assert c[-1] == pytest.approx(60.0)


def test_replicate_data_deterministic():
    a0, y0 = replicate_data(SMALL, 1)
    a1, y1 = replicate_data(SMALL, 1)
    np.testing.assert_array_equal(y0, y1)
    _, y2 = replicate_data(SMALL, 0)
    assert not np.array_equal(y0, y2)


def test_rows_complete_and_finite(small_rows):
    assert len(small_rows) == SMALL.reps * len(SMALL.methods)
    assert [(r["replicate"], r["method"]) for r in small_rows] == [
        (rep, m) for rep in range(SMALL.reps) for m in SMALL.methods
    ]
    for r in small_rows:
        assert r["status"] == "ok"
        for k in ("steins_loss", "frobenius_error", "tpr", "fpr", "mcc", "wall_time"):
            assert math.isfinite(r[k])


def test_summary_matches_rows(small_rows):
    summ = summarize(small_rows)
    for m in SMALL.methods:
        vals = [r["steins_loss"] for r in small_rows if r["method"] == m]
        assert summ[m]["steins_loss"]["mean"] == pytest.approx(np.mean(vals), rel=1e-14)
        assert summ[m]["steins_loss"]["sd"] == pytest.approx(np.std(vals, ddof=1), rel=1e-12)
        assert summ[m]["n_ok"] == SMALL.reps


def test_csv_round_trip(small_rows, tmp_path):
    p = tmp_path / "report.csv"
    write_report_csv(p, small_rows)
    back = read_report_csv(p)
    assert p.read_text().splitlines()[0] == ",".join(REPORT_COLUMNS)
    assert summarize(back) == summarize(small_rows)
    doc = summary_json(SMALL, back)
    assert doc["schema_version"] == 1
    json.dumps(doc)


def test_failures_recorded_per_row():
    bad = BenchmarkConfig(
        structure=StructureSpec(kind="hubs", q=10, edge_value=0.5),
        n=20, reps=1, methods=("lla_constant",), tune=False, n_starts=1,
    )
    rows = run_benchmark(bad)
    assert rows[0]["status"] == "failed" and "DomainError" in rows[0]["error"]
    summ = summarize(rows)
    assert summ["lla_constant"]["n_failed"] == 1
    assert summ["lla_constant"]["steins_loss"]["mean"] is None


def test_untuned_uses_fixed_scales():
    cfg = BenchmarkConfig(
        structure=StructureSpec(kind="random", q=10, edge_prob=0.2), n=30, reps=1,
        methods=("lla_horseshoe_expint", "lla_constant"), tune=False,
        scales={"horseshoe": 0.4}, n_starts=2,
    )
    rows = run_benchmark(cfg)
    assert rows[0]["scale"] == 0.4
    assert rows[1]["scale"] == pytest.approx(3.0)
    assert rows[0]["cv_time"] == 0.0


def test_parallel_matches_serial():
    cfg = BenchmarkConfig(
        structure=StructureSpec(kind="hubs", q=10), n=30, reps=2,
        methods=("lla_constant",), tune=False, n_starts=2,
    )
    from dataclasses import replace

    a = run_benchmark(cfg)
    b = run_benchmark(replace(cfg, workers=2))
    for ra, rb in zip(a, b):
        assert ra["steins_loss"] == rb["steins_loss"]
