"""Command line interface.

Subcommands:

* ``simulate``  draw a benchmark dataset and write it as CSV
* ``fit``       fit the mixture to a CSV dataset, optionally archiving it
* ``predict``   evaluate a saved fit at new covariate points
* ``evaluate``  score an estimated surface against the true one
* ``study``     run a replicated simulation comparison

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
The seed is taken from ``--seed``, else the config file, else the
``MIXPROBIT_SEED`` environment variable.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .archive import load_archive, save_archive
from .basis import Dataset
from .config import RunConfig
from .errors import DataError, NumericalError, UsageError
from .fit import fit_dataset
from .inference import predict
from .metrics import askld, ase, ecp, pct_delta_ase, roc
from .simgen import FUNCTION_NAMES, generate
from .study import ROW_FIELDS, run_study

__all__ = ["main"]


def _format_value(value):
    # repr of a Python float is the shortest string that round-trips.
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def _write_csv(path, header, rows):
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(v) for v in row])

    if path is None or path == "-":
        emit(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)


def _read_csv_table(path):
    """Read a CSV file into (column names, float matrix).

    The first row is treated as a header unless every cell in it parses
    as a number, in which case columns are named x1, x2, ...
    """
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path} contains no rows")
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        names = [cell.strip() for cell in rows[0]]
        body = rows[1:]
    else:
        names = [f"x{i + 1}" for i in range(len(rows[0]))]
        body = rows
    if not body:
        raise DataError(f"{path} has a header but no data rows")
    width = len(names)
    matrix = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: row {i + 2 if len(body) < len(rows) else i + 1} "
                f"has {len(row)} fields, expected {width}")
        try:
            matrix[i] = [float(cell) for cell in row]
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
    return names, matrix


def _read_dataset(path):
    """Load a fitting dataset: covariates, binary responses, optional truth.

    The response column is the one named ``w`` if present, else the last
    column; a ``true_prob`` column is returned separately and never used
    as a covariate.
    """
    names, matrix = _read_csv_table(path)
    response_idx = names.index("w") if "w" in names else len(names) - 1
    truth_idx = names.index("true_prob") if "true_prob" in names else None
    if truth_idx == response_idx:
        raise DataError(f"{path}: no response column alongside true_prob")
    covariate_idx = [i for i in range(len(names))
                     if i not in (response_idx, truth_idx)]
    if not covariate_idx:
        raise DataError(f"{path}: no covariate columns found")
    dataset = Dataset.from_arrays(matrix[:, covariate_idx],
                                  matrix[:, response_idx])
    truth = matrix[:, truth_idx] if truth_idx is not None else None
    return dataset, truth


def _read_points(path):
    """Load prediction points: every column except w/true_prob is a covariate."""
    names, matrix = _read_csv_table(path)
    keep = [i for i, name in enumerate(names)
            if name not in ("w", "true_prob")]
    if not keep:
        raise DataError(f"{path}: no covariate columns found")
    return matrix[:, keep]


def _read_column(path, candidates):
    """Pull one named column from a CSV file, or its only column."""
    names, matrix = _read_csv_table(path)
    for name in candidates:
        if name in names:
            return matrix[:, names.index(name)]
    if matrix.shape[1] == 1:
        return matrix[:, 0]
    raise DataError(
        f"{path}: expected a column named one of {', '.join(candidates)}")


def _resolve_seed(args, config):
    if getattr(args, "seed", None) is not None:
        return args.seed
    if config.seed is not None:
        return config.seed
    env = os.environ.get("MIXPROBIT_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise UsageError(
            f"MIXPROBIT_SEED must be an integer, got {env!r}") from None


_OVERRIDE_FIELDS = ("function", "n", "replications", "jobs", "level",
                    "max_components", "b_negated_exponents")


def _load_config(args):
    if getattr(args, "config", None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    overrides = {}
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if overrides:
        config = config.replace(**overrides)
    config = config.replace(seed=_resolve_seed(args, config))
    config.validate()
    return config


def cmd_simulate(args):
    config = _load_config(args)
    rng = np.random.default_rng(config.seed)
    dataset, truth = generate(config.function, config.n, rng,
                              b_negated_exponents=config.b_negated_exponents)
    header = [f"x{i + 1}" for i in range(dataset.p)] + ["w", "true_prob"]
    rows = [list(dataset.covariates[i])
            + [int(dataset.responses[i]), truth[i]]
            for i in range(dataset.n)]
    _write_csv(args.out, header, rows)
    return 0


def _print_fit_summary(result):
    probs = " ".join(_format_value(v) for v in result.model_probs)
    print(f"model_probabilities {probs}")
    print(f"rj_acceptance {_format_value(result.trace.rj_acceptance_rate())}")
    print("delta_acceptance "
          f"{_format_value(result.trace.delta_acceptance_rate())}")
    print(f"basis_rank {result.expansion.rank}")
    print(f"energy_ratio {_format_value(result.expansion.energy_ratio)}")
    print(f"retained_draws {len(result.trace.draws)}")
    print(f"elapsed_seconds {_format_value(result.elapsed)}")


def _write_trace(path, trace):
    with open(path, "w") as fh:
        for record in trace.draws:
            doc = {
                "iteration": int(record.iteration),
                "r": int(record.r),
                "alpha": record.alpha.tolist(),
                "beta": record.beta.tolist(),
                "tau": record.tau.tolist(),
                "delta": record.delta.tolist(),
                "loglik": float(record.loglik),
            }
            fh.write(json.dumps(doc) + "\n")


def cmd_fit(args):
    config = _load_config(args)
    dataset, _ = _read_dataset(args.data)
    result = fit_dataset(dataset, config)
    _print_fit_summary(result)
    if args.trace:
        _write_trace(args.trace, result.trace)
    if args.out:
        save_archive(args.out, result)
    return 0


def cmd_predict(args):
    result = load_archive(args.archive)
    points = _read_points(args.data)
    fitted, lower, upper = predict(result, points, level=args.level)
    header = [f"x{i + 1}" for i in range(points.shape[1])] \
        + ["fitted", "lower", "upper"]
    rows = [list(points[i]) + [fitted[i], lower[i], upper[i]]
            for i in range(points.shape[0])]
    _write_csv(args.out, header, rows)
    return 0


def cmd_evaluate(args):
    requested = [name.strip() for name in args.metrics.split(",")
                 if name.strip()]
    if not requested:
        raise UsageError("no metrics requested")
    known = ("askld", "ase", "coverage", "auc", "pct_delta_ase")
    for name in requested:
        if name not in known:
            raise UsageError(
                f"unknown metric {name!r}; choose from {', '.join(known)}")
    truth = _read_column(args.truth, ("true_prob", "truth"))
    estimate = _read_column(args.estimate, ("fitted", "estimate"))
    rows = []
    for name in requested:
        if name == "askld":
            rows.append((name, askld(truth, estimate)))
        elif name == "ase":
            rows.append((name, ase(truth, estimate)))
        elif name == "coverage":
            lower = _read_column(args.estimate, ("lower",))
            upper = _read_column(args.estimate, ("upper",))
            rows.append((name, float(np.mean(ecp(truth, lower, upper)))))
        elif name == "auc":
            labels = _read_column(args.truth, ("w",))
            curve = roc(labels, estimate)
            rows.append((name, curve.auc))
            if args.out not in (None, "-"):
                curve_path = Path(args.out).with_suffix(".roc.csv")
                _write_csv(curve_path, ["threshold", "fpr", "tpr"],
                           list(zip(curve.thresholds, curve.fpr, curve.tpr)))
        elif name == "pct_delta_ase":
            if not args.baseline:
                raise UsageError("pct_delta_ase needs --baseline")
            baseline = _read_column(args.baseline, ("fitted", "estimate"))
            rows.append((name, pct_delta_ase(ase(truth, baseline),
                                             ase(truth, estimate))))
    _write_csv(args.out, ["metric", "value"], rows)
    return 0


def cmd_study(args):
    config = _load_config(args)
    result = run_study(config)
    if args.out:
        _write_csv(args.out,
                   list(ROW_FIELDS),
                   [[row[field] for field in ROW_FIELDS]
                    for row in result.rows])
    for key, value in result.summary.items():
        print(f"{key} {_format_value(value)}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mixprobit",
        description="Adaptive mixtures of probit spline experts for "
                    "binary regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a benchmark dataset as CSV")
    sim.add_argument("--function", choices=FUNCTION_NAMES)
    sim.add_argument("--n", type=int)
    sim.add_argument("--b-negated-exponents", dest="b_negated_exponents",
                     action=argparse.BooleanOptionalAction,
                     help="negate the exponents of benchmark function b")
    sim.add_argument("--config")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", help="output CSV path (default stdout)")
    sim.set_defaults(handler=cmd_simulate)

    fit = sub.add_parser("fit", help="fit the mixture to a CSV dataset")
    fit.add_argument("--data", required=True, help="training CSV")
    fit.add_argument("--config")
    fit.add_argument("--seed", type=int)
    fit.add_argument("--level", type=float)
    fit.add_argument("--max-components", dest="max_components", type=int)
    fit.add_argument("--out", help="archive JSON path")
    fit.add_argument("--trace", help="newline-delimited JSON draw log")
    fit.set_defaults(handler=cmd_fit)

    pred = sub.add_parser("predict", help="evaluate a saved fit at new points")
    pred.add_argument("--archive", required=True, help="fit archive JSON")
    pred.add_argument("--data", required=True, help="CSV of covariate points")
    pred.add_argument("--level", type=float)
    pred.add_argument("--out", help="output CSV path (default stdout)")
    pred.set_defaults(handler=cmd_predict)

    ev = sub.add_parser("evaluate",
                        help="score an estimated surface against the truth")
    ev.add_argument("--truth", required=True,
                    help="CSV holding true_prob (and w for auc)")
    ev.add_argument("--estimate", required=True,
                    help="CSV holding the fitted surface")
    ev.add_argument("--baseline", help="competitor CSV for pct_delta_ase")
    ev.add_argument("--metrics", default="askld,ase",
                    help="comma-separated list (default askld,ase)")
    ev.add_argument("--out", help="output CSV path (default stdout)")
    ev.set_defaults(handler=cmd_evaluate)

    study = sub.add_parser("study", help="run a replicated simulation study")
    study.add_argument("--function", choices=FUNCTION_NAMES)
    study.add_argument("--n", type=int)
    study.add_argument("--replications", type=int)
    study.add_argument("--jobs", type=int)
    study.add_argument("--level", type=float)
    study.add_argument("--max-components", dest="max_components", type=int)
    study.add_argument("--b-negated-exponents", dest="b_negated_exponents",
                       action=argparse.BooleanOptionalAction)
    study.add_argument("--config")
    study.add_argument("--seed", type=int)
    study.add_argument("--out", help="per-replication CSV path")
    study.set_defaults(handler=cmd_study)

    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; fold that into the usage code.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
