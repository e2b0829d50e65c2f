"""Command line interface: pipelines, formats, seeds, exit codes."""

import csv
import io
import json
import subprocess
import sys
from contextlib import redirect_stdout

import numpy as np
import pytest

from mixprobit.cli import main
from mixprobit.config import RunConfig
from mixprobit.study import ROW_FIELDS


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out):
        old_err, sys.stderr = sys.stderr, err
        try:
            code = main(argv)
        finally:
            sys.stderr = old_err
    return code, out.getvalue(), err.getvalue()


def _read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    ws = tmp_path_factory.mktemp("cli")
    cfg = RunConfig(seed=23, n=60, function="a", max_components=2,
                    pilot_burnin=30, pilot_length=50, warmup=30, sampling=60)
    cfg_path = ws / "config.json"
    cfg.to_file(cfg_path)
    data = ws / "data.csv"
    code, _, err = _run(["simulate", "--config", str(cfg_path),
                         "--out", str(data)])
    assert code == 0, err
    archive = ws / "fit.json"
    trace = ws / "trace.ndjson"
    code, fit_stdout, err = _run(["fit", "--data", str(data),
                                  "--config", str(cfg_path),
                                  "--out", str(archive),
                                  "--trace", str(trace)])
    assert code == 0, err
    preds = ws / "preds.csv"
    code, _, err = _run(["predict", "--archive", str(archive),
                         "--data", str(data), "--out", str(preds)])
    assert code == 0, err
    return {"dir": ws, "config": cfg_path, "data": data, "archive": archive,
            "trace": trace, "preds": preds, "fit_stdout": fit_stdout}


def test_simulate_layout(workspace):
    header, body = _read_rows(workspace["data"])
    assert header == ["x1", "w", "true_prob"]
    assert len(body) == 60
    for row in body:
        assert row[1] in ("0", "1")
        assert 0.0 <= float(row[2]) <= 1.0


def test_simulate_bivariate_layout(tmp_path):
    out = tmp_path / "disc.csv"
    code, _, _ = _run(["simulate", "--function", "d", "--n", "15",
                       "--seed", "3", "--out", str(out)])
    assert code == 0
    header, body = _read_rows(out)
    assert header == ["x1", "x2", "w", "true_prob"]
    assert len(body) == 15


def test_simulate_seed_reproducibility(tmp_path):
    paths = [tmp_path / name for name in ("a.csv", "b.csv", "c.csv")]
    for path, seed in zip(paths, ("40", "40", "41")):
        assert _run(["simulate", "--function", "b", "--n", "25",
                     "--seed", seed, "--out", str(path)])[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_bytes() != paths[2].read_bytes()


def test_simulate_stdout_default(capsys):
    assert main(["simulate", "--function", "a", "--n", "4", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "x1,w,true_prob"
    assert len(lines) == 5


def test_seed_flag_beats_config(workspace, tmp_path):
    flag = tmp_path / "flag.csv"
    plain = tmp_path / "plain.csv"
    cfg99 = RunConfig.from_file(workspace["config"]).replace(seed=99)
    cfg99_path = tmp_path / "cfg99.json"
    cfg99.to_file(cfg99_path)
    assert _run(["simulate", "--config", str(workspace["config"]),
                 "--seed", "99", "--out", str(flag)])[0] == 0
    assert _run(["simulate", "--config", str(cfg99_path),
                 "--out", str(plain)])[0] == 0
    assert flag.read_bytes() == plain.read_bytes()
    assert flag.read_bytes() != workspace["data"].read_bytes()


def test_seed_env_fallback(tmp_path, monkeypatch):
    via_env = tmp_path / "env.csv"
    via_flag = tmp_path / "flag.csv"
    monkeypatch.setenv("MIXPROBIT_SEED", "7")
    assert _run(["simulate", "--function", "c", "--n", "12",
                 "--out", str(via_env)])[0] == 0
    monkeypatch.delenv("MIXPROBIT_SEED")
    assert _run(["simulate", "--function", "c", "--n", "12", "--seed", "7",
                 "--out", str(via_flag)])[0] == 0
    assert via_env.read_bytes() == via_flag.read_bytes()


def test_seed_env_must_be_integer(monkeypatch):
    monkeypatch.setenv("MIXPROBIT_SEED", "soon")
    code, _, err = _run(["simulate", "--function", "a", "--n", "4"])
    assert code == 1
    assert "MIXPROBIT_SEED" in err


def test_fit_summary_lines(workspace):
    summary = dict(line.split(" ", 1)
                   for line in workspace["fit_stdout"].strip().splitlines())
    probs = [float(v) for v in summary["model_probabilities"].split()]
    assert len(probs) == 2
    assert sum(probs) == pytest.approx(1.0)
    assert int(summary["retained_draws"]) == 60
    assert int(summary["basis_rank"]) >= 1
    assert 0.0 <= float(summary["delta_acceptance"]) <= 1.0
    assert float(summary["elapsed_seconds"]) > 0.0


def test_trace_is_newline_delimited_json(workspace):
    lines = workspace["trace"].read_text().strip().splitlines()
    assert len(lines) == 60
    first = json.loads(lines[0])
    assert set(first) == {"iteration", "r", "alpha", "beta", "tau",
                          "delta", "loglik"}
    assert first["r"] in (1, 2)


def test_predict_output_matches_archive_summary(workspace):
    header, body = _read_rows(workspace["preds"])
    assert header == ["x1", "fitted", "lower", "upper"]
    doc = json.loads(workspace["archive"].read_text())
    fitted = np.array([float(row[1]) for row in body])
    np.testing.assert_allclose(fitted, doc["summaries"]["fitted"], atol=1e-10)
    lower = np.array([float(row[2]) for row in body])
    upper = np.array([float(row[3]) for row in body])
    assert np.all(lower <= upper)


def test_predict_rejects_width_mismatch(workspace, tmp_path):
    wide = tmp_path / "wide.csv"
    wide.write_text("x1,x2\n0.1,0.2\n")
    code, _, err = _run(["predict", "--archive", str(workspace["archive"]),
                         "--data", str(wide)])
    assert code == 2
    assert "error:" in err


def test_evaluate_perfect_estimate_scores_zero(workspace, tmp_path):
    _, body = _read_rows(workspace["data"])
    estimate = tmp_path / "perfect.csv"
    estimate.write_text("fitted\n"
                        + "".join(f"{row[2]}\n" for row in body))
    out = tmp_path / "scores.csv"
    code, _, _ = _run(["evaluate", "--truth", str(workspace["data"]),
                       "--estimate", str(estimate), "--out", str(out)])
    assert code == 0
    header, rows = _read_rows(out)
    assert header == ["metric", "value"]
    scores = {name: float(value) for name, value in rows}
    assert scores["askld"] == 0.0
    assert scores["ase"] == 0.0


def test_evaluate_coverage_and_auc(workspace, tmp_path):
    out = tmp_path / "scores.csv"
    code, _, _ = _run(["evaluate", "--truth", str(workspace["data"]),
                       "--estimate", str(workspace["preds"]),
                       "--metrics", "coverage,auc", "--out", str(out)])
    assert code == 0
    _, rows = _read_rows(out)
    scores = {name: float(value) for name, value in rows}
    assert 0.0 <= scores["coverage"] <= 1.0
    assert 0.5 <= scores["auc"] <= 1.0
    curve_header, curve_rows = _read_rows(out.with_suffix(".roc.csv"))
    assert curve_header == ["threshold", "fpr", "tpr"]
    assert [float(v) for v in curve_rows[0][1:]] == [0.0, 0.0]
    assert [float(v) for v in curve_rows[-1][1:]] == [1.0, 1.0]


def test_evaluate_pct_delta_ase_requires_baseline(workspace, capsys):
    code = main(["evaluate", "--truth", str(workspace["data"]),
                 "--estimate", str(workspace["preds"]),
                 "--metrics", "pct_delta_ase"])
    assert code == 1
    assert "--baseline" in capsys.readouterr().err
    code, out, _ = _run(["evaluate", "--truth", str(workspace["data"]),
                         "--estimate", str(workspace["preds"]),
                         "--baseline", str(workspace["preds"]),
                         "--metrics", "pct_delta_ase"])
    assert code == 0
    assert float(out.strip().splitlines()[-1].split(",")[1]) == 0.0


def test_evaluate_unknown_metric(workspace):
    code, _, err = _run(["evaluate", "--truth", str(workspace["data"]),
                         "--estimate", str(workspace["preds"]),
                         "--metrics", "brier"])
    assert code == 1
    assert "unknown metric" in err


def test_study_rows_and_summary(tmp_path):
    cfg = RunConfig(seed=6, n=40, function="c", max_components=2,
                    replications=1, pilot_burnin=25, pilot_length=40,
                    warmup=25, sampling=50)
    cfg_path = tmp_path / "study.json"
    cfg.to_file(cfg_path)
    out = tmp_path / "rows.csv"
    code, stdout, err = _run(["study", "--config", str(cfg_path),
                              "--out", str(out)])
    assert code == 0, err
    header, body = _read_rows(out)
    assert header == list(ROW_FIELDS)
    assert len(body) == 1
    summary = dict(line.split(" ", 1) for line in stdout.strip().splitlines())
    assert summary["replications"] == "1"
    assert "median_askld_difference" in summary
    assert "pct_delta_aecp_mixture" in summary


def test_missing_data_file_is_data_error(tmp_path):
    code, _, err = _run(["fit", "--data", str(tmp_path / "absent.csv")])
    assert code == 2
    assert "cannot read" in err


def test_bad_usage_exits_one():
    assert _run(["no-such-command"])[0] == 1
    assert _run(["simulate", "--function", "z", "--n", "4"])[0] == 1
    assert _run(["fit"])[0] == 1
    assert _run([])[0] == 1


def test_config_with_unknown_key_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nn": 3}))
    code, _, err = _run(["simulate", "--config", str(bad)])
    assert code == 1
    assert "unknown config keys" in err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mixprobit", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
