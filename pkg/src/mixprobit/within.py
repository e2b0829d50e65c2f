"""Conditional updates for a fixed component count.

One sweep refreshes the blocks in the order: component labels, latent
utilities, gating coefficients (independence MH at the Newton mode),
linear coefficients with the spline block marginalized, spline
coefficients, and smoothing variances.  The variances are drawn on the
decreasing cone directly, each one pinned between its neighbors, so the
identifiability ordering survives every sweep without a relabeling pass.
That matters beyond convenience: the gating prior sits on re-based rows
and is not symmetric under component permutation once there are three
components, so sorting after an unconstrained draw would target a
slightly different distribution.  Every draw goes through the supplied
generator, so a sweep is reproducible from the seed alone.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import logsumexp, ndtr, softmax

from .basis import normalize_covariates
from .dists import MvtProposal, slice_sample, truncated_unit_normal
from .errors import NumericalError
from .model import MixtureParams, gating_matrix, surface_matrix

__all__ = [
    "FitContext",
    "LatentState",
    "draw_gamma",
    "draw_utilities",
    "draw_delta",
    "draw_alpha",
    "draw_beta",
    "draw_tau",
    "relabel",
    "within_sweep",
    "delta_log_posterior",
]

logger = logging.getLogger(__name__)

TAU_FLOOR = 1e-8
LOG_TAU_MIN = -745.0


@dataclass(frozen=True)
class FitContext:
    """Precomputed design quantities shared by every conditional draw."""

    dataset: object
    expansion: object
    prior: object
    Z: np.ndarray
    X: np.ndarray
    lam2: np.ndarray
    ZtZ: np.ndarray
    ZtX: np.ndarray

    @classmethod
    def build(cls, dataset, expansion, prior):
        norm = normalize_covariates(dataset)
        Z = np.column_stack([np.ones(dataset.n), norm])
        X = expansion.design
        if X is None:
            raise NumericalError("expansion carries no training design")
        lam2 = expansion.singular_values ** 2
        if X.shape[1]:
            gram = X.T @ X
            scale = max(1.0, float(lam2.max()))
            if not np.allclose(gram, np.diag(lam2), atol=1e-8 * scale):
                raise NumericalError("spline design lost column orthogonality")
        return cls(dataset, expansion, prior.resolved(dataset.n),
                   Z, X, lam2, Z.T @ Z, Z.T @ X)

    def with_responses(self, responses):
        return replace(self, dataset=self.dataset.with_responses(responses))

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def q(self):
        return self.Z.shape[1]

    @property
    def rank(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class LatentState:
    """Component labels and the latent utility matrix from one sweep."""

    gamma: np.ndarray
    utilities: np.ndarray


def draw_gamma(params, ctx, rng):
    """Sample labels: P(j) proportional to pi_j * Phi(g_j) when w = 1,
    pi_j * (1 - Phi(g_j)) when w = 0.

    Rows whose weights all underflow to zero fall back to the gating
    weights alone (logged).
    """
    G = surface_matrix(params, ctx.Z, ctx.X)
    pi = gating_matrix(params.delta, ctx.Z)
    p1 = ndtr(G)
    w = ctx.dataset.responses[:, None]
    weights = pi * np.where(w == 1, p1, 1.0 - p1)
    total = weights.sum(axis=1)
    dead = total == 0.0
    if np.any(dead):
        logger.warning("label weights underflowed for %d rows; using gating weights",
                       int(dead.sum()))
        weights = weights.copy()
        weights[dead] = pi[dead]
        total = weights.sum(axis=1)
    cum = np.cumsum(weights, axis=1)
    u = rng.random(ctx.n) * total
    return np.sum(u[:, None] >= cum, axis=1).astype(np.int64)


def draw_utilities(params, gamma, ctx, rng):
    """Latent utilities: N(g_ij, 1), sign-constrained on the labeled entry.

    utilities[i, gamma_i] > 0 iff w_i = 1; all other entries unconstrained.
    """
    G = surface_matrix(params, ctx.Z, ctx.X)
    V = G + rng.standard_normal(G.shape)
    rows = np.arange(ctx.n)
    V[rows, gamma] = truncated_unit_normal(
        rng, G[rows, gamma], ctx.dataset.responses == 1)
    return V


def delta_log_posterior(delta, gamma, Z, c_delta):
    """Log density (up to a constant) of the gating block given labels."""
    n, r = Z.shape[0], delta.shape[0] + 1
    scores = np.zeros((n, r))
    if delta.shape[0]:
        scores[:, 1:] = Z @ delta.T
    ll = float(scores[np.arange(n), gamma].sum() - logsumexp(scores, axis=1).sum())
    return ll - float(np.sum(delta * delta)) / (2.0 * c_delta)


def _delta_grad_hess(delta, gamma, Z, c_delta):
    n, q = Z.shape
    k = delta.shape[0]
    scores = np.zeros((n, k + 1))
    scores[:, 1:] = Z @ delta.T
    P = softmax(scores, axis=1)
    Y = np.zeros((n, k + 1))
    Y[np.arange(n), gamma] = 1.0
    grad = (Z.T @ (Y[:, 1:] - P[:, 1:])).T - delta / c_delta
    H = np.empty((k * q, k * q))
    for j in range(k):
        for m in range(k):
            wgt = P[:, j + 1] * ((1.0 if j == m else 0.0) - P[:, m + 1])
            block = -(Z * wgt[:, None]).T @ Z
            if j == m:
                block = block - np.eye(q) / c_delta
            H[j * q:(j + 1) * q, m * q:(m + 1) * q] = block
    return grad.ravel(), H


def _delta_newton_mode(delta0, gamma, Z, c_delta, tol=1e-8, max_iter=100):
    """Damped Newton ascent of the gating conditional.

    Converged when the gradient is small or the Newton decrement (the
    predicted remaining improvement) falls below float resolution at the
    current objective value; near the mode the gradient alone can sit just
    above ``tol`` with no representable improvement left.
    """
    shape = delta0.shape
    x = delta0.ravel().copy()
    f = delta_log_posterior(x.reshape(shape), gamma, Z, c_delta)
    g, H = _delta_grad_hess(x.reshape(shape), gamma, Z, c_delta)
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= tol:
            return x, H, True
        try:
            step = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            return x, H, False
        if 0.5 * float(g @ step) <= 1e-12 * (1.0 + abs(f)):
            return x, H, True
        t = 1.0
        while t >= 2.0 ** -30:
            xn = x + t * step
            fn = delta_log_posterior(xn.reshape(shape), gamma, Z, c_delta)
            if np.isfinite(fn) and fn >= f:
                x, f = xn, fn
                break
            t *= 0.5
        else:
            return x, H, False
        g, H = _delta_grad_hess(x.reshape(shape), gamma, Z, c_delta)
    return x, H, np.max(np.abs(g)) <= tol


def draw_delta(params, gamma, ctx, rng):
    """Independence-MH update of the gating block.

    The proposal is a five-degree multivariate t centered at the Newton
    mode of the gating conditional with the negative inverse Hessian as
    scale.  Returns (delta, accepted); a no-op for one component.
    """
    if params.r == 1:
        return params.delta, True
    c_delta = ctx.prior.c_delta
    mode, H, ok = _delta_newton_mode(params.delta, gamma, ctx.Z, c_delta)
    if not ok:
        logger.warning("gating mode search did not converge; keeping current block")
        return params.delta, False
    cov = np.linalg.inv(-H)
    cov = 0.5 * (cov + cov.T)
    prop = MvtProposal(mode, cov)
    shape = params.delta.shape
    cur = params.delta.ravel()
    cand = prop.sample(rng)
    log_ratio = (delta_log_posterior(cand.reshape(shape), gamma, ctx.Z, c_delta)
                 - delta_log_posterior(params.delta, gamma, ctx.Z, c_delta)
                 + prop.logpdf(cur) - prop.logpdf(cand))
    if np.log(max(rng.random(), 1e-300)) < log_ratio:
        return cand.reshape(shape), True
    return params.delta, False


def draw_alpha(params, j, utilities, ctx, rng):
    """Gaussian draw of component j's linear coefficients with the spline
    block marginalized out.

    Precision is Z'Z + I/c_alpha - Z'X tau (tau X'X + I)^-1 X'Z; the inner
    inverse is diagonal because the design columns are orthogonal.
    """
    v = utilities[:, j]
    tau = float(params.tau[j])
    d = tau / (tau * ctx.lam2 + 1.0)
    A = ctx.ZtX
    prec = ctx.ZtZ + np.eye(ctx.q) / ctx.prior.c_alpha
    if ctx.rank:
        prec = prec - (A * d) @ A.T
    rhs = ctx.Z.T @ v
    if ctx.rank:
        rhs = rhs - A @ (d * (ctx.X.T @ v))
    try:
        L = np.linalg.cholesky(prec)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "linear-coefficient precision is not positive definite; "
            "the basis expansion may have lost orthogonality") from exc
    mean = cho_solve((L, True), rhs)
    return mean + solve_triangular(L.T, rng.standard_normal(ctx.q), lower=False)


def draw_beta(params, j, alpha_j, utilities, ctx, rng):
    """Gaussian draw of component j's spline coefficients.

    The posterior covariance is diagonal: tau / (tau lam_k^2 + 1) per column.
    """
    if not ctx.rank:
        return np.zeros(0)
    tau = float(params.tau[j])
    var = tau / (tau * ctx.lam2 + 1.0)
    resid = utilities[:, j] - ctx.Z @ alpha_j
    mean = var * (ctx.X.T @ resid)
    return mean + np.sqrt(var) * rng.standard_normal(ctx.rank)


def _power_log_tau_draw(rng, c, lo, hi):
    # density proportional to exp(c * u) on [lo, hi], u = log tau
    if c == 0.0:
        return lo + rng.random() * (hi - lo)
    a, b = c * lo, c * hi
    m = max(a, b)
    t = np.log(np.exp(a - m) + rng.random() * (np.exp(b - m) - np.exp(a - m))) + m
    return t / c


def draw_tau(params, ctx, rng):
    """Smoothing variances from their ordered inverse-gamma conditionals.

    Each tau_j has density proportional to tau^(-l/2) exp(-|beta_j|^2/(2 tau)):
    a truncated inverse gamma with shape l/2 - 1 and scale |beta_j|^2 / 2,
    sampled by ten slice updates on log tau.  The slice window for tau_j is
    the slab between its neighbors (updated value above, current value
    below), so the draw is a Gibbs step on the decreasing cone and the
    ordering holds by construction.  A zero beta block degenerates to the
    pure power density on the same slab.
    """
    l = ctx.rank
    cap = float(np.log(ctx.prior.c_tau))
    floor = float(np.log(TAU_FLOOR))
    out = params.tau.copy()
    for j in range(params.r):
        hi = cap if j == 0 else min(cap, float(np.log(out[j - 1])))
        lo = floor if j == params.r - 1 else max(floor, float(np.log(params.tau[j + 1])))
        s = 0.5 * float(params.beta[j] @ params.beta[j])
        if s == 0.0:
            out[j] = np.exp(_power_log_tau_draw(rng, 1.0 - 0.5 * l, lo, hi))
            continue

        def logpdf(u, s=s, l=l):
            return (1.0 - 0.5 * l) * u - s * np.exp(min(-u, 700.0))

        gap = 1e-12 * max(1.0, abs(hi))
        u0 = min(max(float(np.log(params.tau[j])), lo + gap), hi - gap)
        if not np.isfinite(logpdf(u0)):
            # restart from the conditional's mode, clipped into the slab
            u0 = min(max(np.log(2.0 * s / max(l, 2)), lo + gap), hi - gap)
        out[j] = np.exp(slice_sample(logpdf, u0, lo, hi, rng,
                                     iterations=10, width=2.0))
    return out


def relabel(params, gamma=None, utilities=None):
    """Reorder components so tau strictly decreases.

    The gating rows are re-based against the new first component, which
    leaves every gating weight numerically unchanged; labels and utility
    columns move with their components.
    """
    r = params.r
    order = np.argsort(-params.tau, kind="stable")
    if np.array_equal(order, np.arange(r)):
        return params, gamma, utilities
    q = params.alpha.shape[1]
    eta = np.zeros((r, q))
    if r > 1:
        eta[1:] = params.delta
    eta = eta[order]
    new = MixtureParams(
        alpha=params.alpha[order],
        beta=params.beta[order],
        tau=params.tau[order],
        delta=eta[1:] - eta[0],
    )
    if gamma is not None:
        inv = np.empty(r, dtype=np.int64)
        inv[order] = np.arange(r)
        gamma = inv[gamma]
    if utilities is not None:
        utilities = utilities[:, order]
    return new, gamma, utilities


def within_sweep(params, ctx, rng):
    """One full conditional sweep at fixed component count.

    Returns (params, LatentState, delta_accepted).
    """
    gamma = draw_gamma(params, ctx, rng)
    utils = draw_utilities(params, gamma, ctx, rng)
    delta, accepted = draw_delta(params, gamma, ctx, rng)
    params = replace(params, delta=delta)
    alpha = params.alpha.copy()
    beta = params.beta.copy()
    for j in range(params.r):
        alpha[j] = draw_alpha(params, j, utils, ctx, rng)
        beta[j] = draw_beta(params, j, alpha[j], utils, ctx, rng)
    params = replace(params, alpha=alpha, beta=beta)
    params = replace(params, tau=draw_tau(params, ctx, rng))
    return params, LatentState(gamma, utils), accepted
