"""Replicated study driver: row layout, aggregation, reproducibility."""

import numpy as np
import pytest

from mixprobit.config import RunConfig
from mixprobit.study import ROW_FIELDS, run_study, summarize_rows

TINY = dict(seed=5, n=50, function="c", max_components=2, replications=2,
            pilot_burnin=30, pilot_length=50, warmup=30, sampling=60)


def test_summarize_rows_hand_checked():
    rows = [
        {"rep": 0, "askld_mixture": 1.0, "askld_single": 3.0,
         "ase_mixture": 0.02, "ase_single": 0.03,
         "coverage_mixture": 0.95, "coverage_single": 0.80,
         "pr_single_component": 0.2, "pr_multi_component": 0.8},
        {"rep": 1, "askld_mixture": 2.0, "askld_single": 8.0,
         "ase_mixture": 0.04, "ase_single": 0.05,
         "coverage_mixture": 0.85, "coverage_single": 0.90,
         "pr_single_component": 0.4, "pr_multi_component": 0.6},
    ]
    s = summarize_rows(rows, level=0.90)
    assert s["replications"] == 2
    assert s["median_askld_mixture"] == 1.5
    assert s["median_askld_difference"] == pytest.approx(4.0)
    # per-row percentage changes are 50% and 25%
    assert s["median_pct_delta_ase"] == pytest.approx(37.5)
    assert s["mean_pr_single_component"] == pytest.approx(0.3)
    assert s["aecp_mixture"] == pytest.approx(0.90)
    assert s["pct_delta_aecp_mixture"] == pytest.approx(0.0)
    assert s["pct_delta_aecp_single"] == pytest.approx(100.0 * (0.85 / 0.9 - 1.0))


def test_summarize_rows_zero_ase_rows_dropped():
    rows = [{"askld_mixture": 0.0, "askld_single": 0.0, "ase_mixture": 0.0,
             "ase_single": 0.0, "coverage_mixture": 1.0,
             "coverage_single": 1.0, "pr_single_component": 1.0,
             "pr_multi_component": 0.0}]
    s = summarize_rows(rows, level=0.90)
    assert np.isnan(s["median_pct_delta_ase"])


@pytest.mark.slow
def test_run_study_rows_and_reproducibility():
    cfg = RunConfig(**TINY)
    result = run_study(cfg)
    assert len(result.rows) == 2
    for rep, row in enumerate(result.rows):
        assert tuple(row) == ROW_FIELDS
        assert row["rep"] == rep
        assert row["askld_mixture"] >= 0.0
        assert 0.0 <= row["coverage_mixture"] <= 1.0
        assert row["pr_single_component"] + row["pr_multi_component"] \
            == pytest.approx(1.0)
    assert result.summary["replications"] == 2
    assert result.config["seed"] == 5

    again = run_study(RunConfig(**TINY))
    for a, b in zip(result.rows, again.rows):
        for key in ROW_FIELDS:
            if key.startswith("seconds"):
                continue
            assert a[key] == b[key], key


@pytest.mark.slow
def test_run_study_parallel_matches_sequential():
    sequential = run_study(RunConfig(**TINY))
    parallel = run_study(RunConfig(**dict(TINY, jobs=2)))
    for a, b in zip(sequential.rows, parallel.rows):
        for key in ROW_FIELDS:
            if key.startswith("seconds"):
                continue
            assert a[key] == b[key], key
