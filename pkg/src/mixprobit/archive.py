"""Version-stamped JSON archive of a fitted model.

The archive is plain structured text: floats serialize through Python's
shortest round-trip representation, so loading reproduces the exact
float64 values.  It carries everything prediction needs (normalization
bounds, knots, projection factors, retained draws) plus the reported
summaries.
"""

import json

import numpy as np

from .basis import BasisExpansion
from .errors import DataError
from .inference import FitResult
from .rjmcmc import ChainTrace, DrawRecord

__all__ = ["save_archive", "load_archive", "ARCHIVE_FORMAT", "ARCHIVE_VERSION"]

ARCHIVE_FORMAT = "mixprobit-fit"
ARCHIVE_VERSION = 1


def _arr(a):
    return np.asarray(a, dtype=float).tolist()


def save_archive(path, result):
    """Write a fit result to ``path`` as a version-stamped JSON document."""
    e = result.expansion
    doc = {
        "format": ARCHIVE_FORMAT,
        "version": ARCHIVE_VERSION,
        "seed": result.seed,
        "level": result.level,
        "config": result.config,
        "prior": {
            "c_alpha": result.prior.c_alpha,
            "c_tau": result.prior.c_tau,
            "c_delta": result.prior.c_delta,
            "max_components": result.prior.max_components,
            "model_prior": (None if result.prior.model_prior is None
                            else list(result.prior.model_prior)),
        },
        "expansion": {
            "knots": _arr(e.knots),
            "exponent": e.exponent,
            "column_min": _arr(e.column_min),
            "column_max": _arr(e.column_max),
            "epsilon": e.epsilon,
            "right_factor": _arr(e.right_factor),
            "singular_values": _arr(e.singular_values),
            "energy_ratio": e.energy_ratio,
        },
        "summaries": {
            "fitted": _arr(result.fitted),
            "lower": _arr(result.lower),
            "upper": _arr(result.upper),
            "model_probs": _arr(result.model_probs),
        },
        "draws": [
            {
                "iteration": d.iteration,
                "r": d.r,
                "alpha": _arr(d.alpha),
                "beta": _arr(d.beta),
                "tau": _arr(d.tau),
                "delta": _arr(d.delta),
                "loglik": d.loglik,
            }
            for d in result.trace.draws
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_archive(path):
    """Load an archive back into a :class:`FitResult` usable for prediction."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read archive {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"archive {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != ARCHIVE_FORMAT:
        raise DataError(f"{path} is not a model archive")
    version = doc.get("version")
    if not isinstance(version, int) or version > ARCHIVE_VERSION:
        raise DataError(
            f"archive version {version!r} is newer than supported {ARCHIVE_VERSION}")
    e = doc["expansion"]
    p = len(e["column_min"])
    knots = np.asarray(e["knots"], dtype=float).reshape(-1, p)
    expansion = BasisExpansion(
        knots=knots,
        exponent=int(e["exponent"]),
        column_min=np.asarray(e["column_min"], dtype=float),
        column_max=np.asarray(e["column_max"], dtype=float),
        epsilon=float(e["epsilon"]),
        design=None,
        right_factor=np.asarray(e["right_factor"], dtype=float).reshape(knots.shape[0], -1),
        singular_values=np.asarray(e["singular_values"], dtype=float),
        energy_ratio=float(e["energy_ratio"]),
    )
    rank = expansion.rank
    q = p + 1
    draws = []
    for d in doc["draws"]:
        r = int(d["r"])
        draws.append(DrawRecord(
            iteration=int(d["iteration"]),
            r=r,
            alpha=np.asarray(d["alpha"], dtype=float).reshape(r, q),
            beta=np.asarray(d["beta"], dtype=float).reshape(r, rank),
            tau=np.asarray(d["tau"], dtype=float),
            delta=np.asarray(d["delta"], dtype=float).reshape(r - 1, q),
            loglik=float(d["loglik"]),
        ))
    prior_doc = doc["prior"]
    from .model import PriorConfig

    prior = PriorConfig(
        c_alpha=prior_doc["c_alpha"],
        c_tau=prior_doc["c_tau"],
        c_delta=prior_doc["c_delta"],
        max_components=prior_doc["max_components"],
        model_prior=(None if prior_doc["model_prior"] is None
                     else tuple(prior_doc["model_prior"])),
    )
    s = doc["summaries"]
    trace = ChainTrace(draws=draws, proposed_r=np.zeros(0, dtype=np.int64),
                       move_accepted=np.zeros(0, dtype=bool),
                       move_log_ratio=np.zeros(0), delta_accepted=np.zeros(0, dtype=bool),
                       warmup=0, sampling=len(draws), thin=1)
    return FitResult(
        expansion=expansion,
        prior=prior,
        trace=trace,
        fitted=np.asarray(s["fitted"], dtype=float),
        lower=np.asarray(s["lower"], dtype=float),
        upper=np.asarray(s["upper"], dtype=float),
        model_probs=np.asarray(s["model_probs"], dtype=float),
        level=float(doc["level"]),
        seed=doc.get("seed"),
        config=doc.get("config") or {},
    )
