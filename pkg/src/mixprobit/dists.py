"""Sampling primitives shared by the conditional and between-model moves."""

import numpy as np
from scipy.special import log_ndtr, ndtri_exp
from scipy.stats import multivariate_t

from .errors import NumericalError

__all__ = ["truncated_unit_normal", "MvtProposal", "slice_sample"]


def truncated_unit_normal(rng, mean, positive):
    """Draw from N(mean, 1) restricted to v > 0 (positive) or v < 0.

    Inverse-CDF in survival space: the uniform is pushed through
    log_ndtr / ndtri_exp so draws stay accurate when the mean sits far on
    the wrong side of zero (|mean| well beyond 5).

    Parameters
    ----------
    rng : numpy Generator
    mean : array_like
    positive : array_like of bool, broadcastable to mean's shape
    """
    mean = np.asarray(mean, dtype=float)
    positive = np.broadcast_to(np.asarray(positive, dtype=bool), mean.shape)
    u = np.clip(rng.random(mean.shape), 1e-16, 1.0 - 1e-16)
    out = np.empty_like(mean)
    pos = positive
    if np.any(pos):
        out[pos] = mean[pos] - ndtri_exp(np.log(u[pos]) + log_ndtr(mean[pos]))
    neg = ~pos
    if np.any(neg):
        out[neg] = mean[neg] + ndtri_exp(np.log(u[neg]) + log_ndtr(-mean[neg]))
    return out


class MvtProposal:
    """Frozen multivariate-t proposal with fixed degrees of freedom.

    Wraps a frozen scipy multivariate_t so the scale factorization happens
    once; used both to draw proposals and to evaluate their density in
    acceptance ratios.
    """

    def __init__(self, mean, scale, df=5.0):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.scale = np.atleast_2d(np.asarray(scale, dtype=float))
        self.df = float(df)
        try:
            self._dist = multivariate_t(loc=self.mean, shape=self.scale, df=self.df)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NumericalError(
                f"proposal scale of dimension {self.mean.size} is not positive definite") from exc

    @property
    def dim(self):
        return self.mean.size

    def sample(self, rng):
        x = self._dist.rvs(random_state=rng)
        return np.atleast_1d(np.asarray(x, dtype=float))

    def logpdf(self, x):
        return float(self._dist.logpdf(np.asarray(x, dtype=float)))


def slice_sample(logpdf, x0, lower, upper, rng, iterations=10, width=1.0, max_steps=64):
    """Univariate slice sampler on a bounded interval.

    Stepping-out from the current point followed by shrinkage; interval
    growth never leaves [lower, upper].  Returns the state after the
    requested number of slice updates.
    """
    x = float(x0)
    fx = logpdf(x)
    if not np.isfinite(fx):
        raise ValueError("slice sampler started outside the support")
    for _ in range(iterations):
        y = fx + np.log(max(rng.random(), 1e-300))
        left = max(lower, x - width * rng.random())
        right = min(upper, left + width)
        steps = 0
        while left > lower and logpdf(left) > y and steps < max_steps:
            left = max(lower, left - width)
            steps += 1
        steps = 0
        while right < upper and logpdf(right) > y and steps < max_steps:
            right = min(upper, right + width)
            steps += 1
        while True:
            xp = left + rng.random() * (right - left)
            fxp = logpdf(xp)
            if fxp > y:
                x, fx = xp, fxp
                break
            if xp < x:
                left = xp
            else:
                right = xp
    return x
