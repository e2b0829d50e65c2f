"""Accuracy and calibration metrics for probability surfaces.

All comparisons treat each point as a two-outcome distribution, so the
divergence below is the symmetrized Kullback-Leibler divergence between
Bernoulli laws averaged over points: nonnegative, zero only at equality,
smaller is better.  Comparisons between estimators are reported as
(other - reference), so positive numbers favor the reference.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "askld",
    "ase",
    "pct_delta_ase",
    "ecp",
    "pct_delta_aecp",
    "roc",
    "RocCurve",
]

CLAMP = 1e-12


def _as_probs(x, name):
    a = np.asarray(x, dtype=float).ravel()
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    if np.any(~np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
        raise ValueError(f"{name} must contain probabilities in [0, 1]")
    return np.clip(a, CLAMP, 1.0 - CLAMP)


def askld(truth, estimate):
    """Average symmetrized KL divergence between Bernoulli laws.

    Per point: sum over both outcomes of (est - tru) * log(est / tru),
    which adds the divergence in both directions.  Inputs are clamped to
    [1e-12, 1 - 1e-12] before taking logs.
    """
    h = _as_probs(truth, "truth")
    e = _as_probs(estimate, "estimate")
    if h.shape != e.shape:
        raise ValueError("truth and estimate lengths differ")
    per_point = (e - h) * (np.log(e / h) - np.log((1.0 - e) / (1.0 - h)))
    return float(per_point.mean())


def ase(truth, estimate):
    """Average squared error between two probability vectors."""
    h = np.asarray(truth, dtype=float).ravel()
    e = np.asarray(estimate, dtype=float).ravel()
    if h.shape != e.shape or h.size == 0:
        raise ValueError("truth and estimate must be nonempty and aligned")
    return float(np.mean((h - e) ** 2))


def pct_delta_ase(ase_other, ase_reference):
    """Percent change of a competitor's ASE relative to the reference:
    100 * (other - reference) / reference.  Positive favors the reference."""
    if ase_reference <= 0:
        raise ValueError("reference ASE must be positive")
    return 100.0 * (ase_other - ase_reference) / ase_reference


def ecp(truth, lower, upper):
    """Pointwise interval hits: 1 where lower <= truth <= upper."""
    h = np.asarray(truth, dtype=float)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if not h.shape == lo.shape == hi.shape:
        raise ValueError("truth and interval bounds must be aligned")
    if np.any(lo > hi):
        raise ValueError("interval lower bounds exceed upper bounds")
    return ((lo <= h) & (h <= hi)).astype(float)


def pct_delta_aecp(hits, nominal):
    """Percent deviation of average empirical coverage from nominal.

    ``hits`` is a (replications, points) hit matrix (or any array of hit
    indicators); the empirical coverage at a point is its column mean and
    the average over points equals the grand mean.
    """
    if not 0.0 < nominal < 1.0:
        raise ValueError("nominal coverage must lie in (0, 1)")
    h = np.asarray(hits, dtype=float)
    if h.size == 0:
        raise ValueError("hit matrix is empty")
    return float(100.0 * (h.mean() - nominal) / nominal)


@dataclass(frozen=True)
class RocCurve:
    """Receiver operating characteristic swept over unique score thresholds.

    thresholds[0] is +inf (the empty classifier at the origin); the curve
    runs from (0, 0) to (1, 1) and ``auc`` is the trapezoid area, equal to
    the tie-corrected Mann-Whitney statistic.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc(labels, scores):
    """ROC curve and AUC for binary labels scored by real values.

    Ties are grouped: every unique score is one threshold, classifying
    score >= threshold as positive.
    """
    y = np.asarray(labels).ravel()
    s = np.asarray(scores, dtype=float).ravel()
    if y.shape != s.shape or y.size == 0:
        raise ValueError("labels and scores must be nonempty and aligned")
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc needs both classes present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of each tie group of equal scores
    boundary = np.nonzero(np.diff(s_sorted))[0]
    ends = np.concatenate([boundary, [s.size - 1]])
    cum_tp = np.cumsum(y_sorted)[ends]
    cum_fp = (ends + 1) - cum_tp
    tpr = np.concatenate([[0.0], cum_tp / n_pos])
    fpr = np.concatenate([[0.0], cum_fp / n_neg])
    thresholds = np.concatenate([[np.inf], s_sorted[ends]])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr, auc=auc)
