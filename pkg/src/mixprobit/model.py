"""Mixture-of-probit-experts model: parameters, priors, surfaces.

An r-component model puts Pr(w = 1 | x) = sum_j pi_j(x) Phi(g_j(x)).  The
gating weights pi_j come from a multinomial logit in z = (1, x') with the
first coefficient row pinned at zero, and each expert surface g_j(x) is
z'alpha_j plus a spline term in the orthogonal basis expansion.  Components
are kept in strictly decreasing order of their smoothing variance tau.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr, softmax

__all__ = [
    "PriorConfig",
    "ComponentParams",
    "MixtureParams",
    "gating_weights",
    "gating_matrix",
    "component_surface",
    "surface_matrix",
    "mixture_probability",
    "mixture_probabilities",
    "observed_loglik",
    "log_prior",
    "coefficient_log_prior",
]

PROB_FLOOR = 1e-300
PROB_CEIL = 1.0 - 1e-16


@dataclass(frozen=True)
class PriorConfig:
    """Prior scales and the model-space prior.

    ``c_delta`` defaults to the sample size; call :meth:`resolved` once n is
    known.  ``model_prior`` is uniform over 1..max_components when None.
    """

    c_alpha: float = 1e4
    c_tau: float = 1e3
    c_delta: float | None = None
    max_components: int = 3
    model_prior: tuple | None = None

    def __post_init__(self):
        if self.c_alpha <= 0 or self.c_tau <= 0:
            raise ValueError("prior variances must be positive")
        if self.c_delta is not None and self.c_delta <= 0:
            raise ValueError("c_delta must be positive when given")
        if self.max_components < 1:
            raise ValueError("max_components must be at least 1")
        if self.model_prior is not None:
            mp = np.asarray(self.model_prior, dtype=float)
            if mp.shape != (self.max_components,) or np.any(mp <= 0):
                raise ValueError("model_prior needs one positive weight per model")

    def resolved(self, n):
        """Fill the sample-size-dependent default for c_delta."""
        if self.c_delta is not None:
            return self
        return replace(self, c_delta=float(n))

    def model_prior_vector(self):
        r = self.max_components
        if self.model_prior is None:
            return np.full(r, 1.0 / r)
        mp = np.asarray(self.model_prior, dtype=float)
        return mp / mp.sum()


@dataclass(frozen=True)
class ComponentParams:
    """One expert: linear coefficients, spline coefficients, smoothing variance."""

    alpha: np.ndarray
    beta: np.ndarray
    tau: float


@dataclass(frozen=True)
class MixtureParams:
    """Stacked parameters of an r-component model.

    alpha: (r, p+1), beta: (r, l), tau: (r,) strictly decreasing,
    delta: (r-1, p+1) gating rows for components 2..r.
    """

    alpha: np.ndarray
    beta: np.ndarray
    tau: np.ndarray
    delta: np.ndarray

    @property
    def r(self):
        return self.alpha.shape[0]

    def component(self, j):
        return ComponentParams(self.alpha[j], self.beta[j], float(self.tau[j]))

    def validate(self, prior=None):
        r, q = self.alpha.shape
        if self.beta.shape[0] != r or self.tau.shape != (r,):
            raise ValueError("component blocks disagree on the component count")
        if self.delta.shape != (r - 1, q):
            raise ValueError("gating rows must be (r-1, p+1)")
        if not np.all(np.isfinite(self.tau)) or np.any(self.tau <= 0):
            raise ValueError("smoothing variances must be finite and positive")
        if np.any(np.diff(self.tau) >= 0):
            raise ValueError("smoothing variances must be strictly decreasing")
        if prior is not None:
            if self.tau[0] >= prior.c_tau:
                raise ValueError("largest smoothing variance exceeds its prior bound")
            if r > prior.max_components:
                raise ValueError("more components than the model space allows")
        return self


def gating_weights(delta, z):
    """Gating weights at one point: softmax of (0, delta_2'z, ..., delta_r'z)."""
    z = np.asarray(z, dtype=float)
    scores = np.zeros(delta.shape[0] + 1)
    if delta.shape[0]:
        scores[1:] = delta @ z
    return softmax(scores)


def gating_matrix(delta, Z):
    """Gating weights for every row of Z; returns (n, r), rows sum to one."""
    n = Z.shape[0]
    scores = np.zeros((n, delta.shape[0] + 1))
    if delta.shape[0]:
        scores[:, 1:] = Z @ delta.T
    return softmax(scores, axis=1)


def component_surface(comp, z, x_row):
    """Latent surface of one expert at a point: z'alpha + basis_row'beta."""
    g = float(np.dot(comp.alpha, z))
    if comp.beta.size:
        g += float(np.dot(comp.beta, x_row))
    return g


def surface_matrix(params, Z, X):
    """Latent surfaces for all experts at all rows; returns (n, r)."""
    G = Z @ params.alpha.T
    if params.beta.shape[1]:
        G = G + X @ params.beta.T
    return G


def mixture_probability(params, z, x_row):
    """Pr(w = 1 | x) at a single point."""
    pi = gating_weights(params.delta, z)
    g = np.array([component_surface(params.component(j), z, x_row)
                  for j in range(params.r)])
    return float(np.dot(pi, ndtr(g)))


def mixture_probabilities(params, Z, X):
    """Pr(w = 1 | x) for every row; returns a length-n vector in [0, 1]."""
    G = surface_matrix(params, Z, X)
    return np.sum(gating_matrix(params.delta, Z) * ndtr(G), axis=1)


def observed_loglik(params, responses, Z, X):
    """Bernoulli log likelihood of the observed responses.

    Mixture probabilities are clamped to [1e-300, 1 - 1e-16] so saturated
    surfaces cannot produce non-finite terms.
    """
    h = np.clip(mixture_probabilities(params, Z, X), PROB_FLOOR, PROB_CEIL)
    w = responses
    return float(np.sum(np.where(w == 1, np.log(h), np.log1p(-h))))


def _normal_logpdf_sum(arr, var):
    k = arr.size
    if k == 0:
        return 0.0
    return -0.5 * k * np.log(2.0 * np.pi * var) - float(np.sum(arr * arr)) / (2.0 * var)


def _tau_in_support(tau, c_tau):
    if np.any(tau <= 0) or tau[0] >= c_tau:
        return False
    return bool(np.all(np.diff(tau) < 0))


def log_prior(params, prior):
    """Joint log prior density of one model's parameters.

    The smoothing-variance block uses the chained-uniform construction:
    tau_1 uniform on (0, c_tau), each later tau_j uniform on (0, tau_{j-1}).
    Outside the strictly decreasing region the value is -inf.
    """
    tau = params.tau
    if not _tau_in_support(tau, prior.c_tau):
        return -np.inf
    lp = -np.log(prior.c_tau)
    if params.r > 1:
        lp -= float(np.sum(np.log(tau[:-1])))
    return lp + coefficient_log_prior(params, prior)


def coefficient_log_prior(params, prior):
    """Log prior of the coefficient blocks given the smoothing variances.

    The between-model acceptance ratio needs the prior with the tau density
    factored out: tau is carried per model rather than proposed, and its
    density cancels against the matching factor for the model being left.
    """
    tau = params.tau
    if not _tau_in_support(tau, prior.c_tau):
        return -np.inf
    lp = _normal_logpdf_sum(params.alpha, prior.c_alpha)
    for j in range(params.r):
        lp += _normal_logpdf_sum(params.beta[j], tau[j])
    if params.delta.size:
        lp += _normal_logpdf_sum(params.delta, prior.c_delta)
    return lp
