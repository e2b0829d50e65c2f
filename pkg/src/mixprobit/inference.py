"""Posterior summaries and out-of-sample prediction from a finished chain."""

from dataclasses import dataclass, field

import numpy as np

from .basis import basis_rows, normalize_points
from .errors import DataError
from .model import MixtureParams, mixture_probabilities

__all__ = ["FitResult", "summarize", "predict", "surface_draws"]


@dataclass
class FitResult:
    """Everything needed to report a fit and predict from it."""

    expansion: object
    prior: object
    trace: object
    fitted: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    model_probs: np.ndarray
    level: float
    seed: object = None
    config: dict = field(default_factory=dict)
    elapsed: float = 0.0


def _record_params(record):
    return MixtureParams(alpha=record.alpha, beta=record.beta,
                         tau=record.tau, delta=record.delta)


def surface_draws(draws, Z, X):
    """Mixture probability surfaces, one row per retained draw: (S, n)."""
    if not draws:
        raise ValueError("no retained draws to summarize")
    out = np.empty((len(draws), Z.shape[0]))
    for t, d in enumerate(draws):
        out[t] = mixture_probabilities(_record_params(d), Z, X)
    return out


def summarize(trace, ctx, level=0.90):
    """Pointwise posterior mean and equal-tailed interval of Pr(w=1|x).

    Returns (fitted, lower, upper, model_probs); model probabilities are
    visit frequencies over the retained draws.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("interval level must lie in (0, 1)")
    surf = surface_draws(trace.draws, ctx.Z, ctx.X)
    fitted = surf.mean(axis=0)
    half = (1.0 - level) / 2.0
    lower, upper = np.quantile(surf, [half, 1.0 - half], axis=0)
    model_probs = trace.model_probabilities(ctx.prior.max_components)
    return fitted, lower, upper, model_probs


def predict(result, points, level=None):
    """Posterior mean and interval of Pr(w=1|x) at new raw-scale points.

    Points pass through the stored normalization and basis projection, so
    a training point reproduces its fitted value.
    """
    level = result.level if level is None else level
    if not 0.0 < level < 1.0:
        raise ValueError("interval level must lie in (0, 1)")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != result.expansion.p:
        raise DataError(
            f"points have {pts.shape[1]} columns, model expects {result.expansion.p}")
    norm = normalize_points(pts, result.expansion.column_min,
                            result.expansion.column_max)
    Z = np.column_stack([np.ones(pts.shape[0]), norm])
    X = basis_rows(result.expansion, pts)
    surf = surface_draws(result.trace.draws, Z, X)
    fitted = surf.mean(axis=0)
    half = (1.0 - level) / 2.0
    lower, upper = np.quantile(surf, [half, 1.0 - half], axis=0)
    return fitted, lower, upper
