"""Between-model moves and the chain driver for the variable-count mixture.

Model hopping uses one independence proposal per component count: a
five-degree multivariate t fitted to pilot-chain iterates of the full
state vector (expert and gating coefficients plus log smoothing
variances).  Keeping the log variances inside the same covariance as the
coefficients matters; each spline block's scale is tied to its smoothing
variance, and a proposal that draws them from separate distributions
lands in regions the posterior gives essentially no mass, freezing the
chain at whatever count it started from.

Raw draws are relabeled so the log variances decrease, the same ordering
the conditional sweeps maintain.  The relabeling is accounted for
exactly: every raw draw that sorts to a given state contributes to its
proposal density, so the density of a sorted state is the fitted t
density summed over all component permutations of that state (the
permutation map has unit Jacobian).  Each main-chain iteration is one
between-model move followed by one conditional sweep at the current
count.
"""

import logging
import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.special import logsumexp

from .dists import MvtProposal
from .errors import NumericalError
from .model import MixtureParams, coefficient_log_prior, observed_loglik
from .within import TAU_FLOOR, within_sweep

__all__ = [
    "PilotStats",
    "PilotSummary",
    "DrawRecord",
    "ChainTrace",
    "run_pilots",
    "propose_r",
    "tau_in_support",
    "rj_log_ratio",
    "Chain",
    "run_chain",
    "flatten_state",
    "unflatten_state",
    "permute_components",
]

logger = logging.getLogger(__name__)

PROPOSAL_RIDGE = 1e-6


def flatten_state(params):
    """Stack (alpha, beta, delta, log tau) into one proposal-space vector."""
    return np.concatenate([params.alpha.ravel(), params.beta.ravel(),
                           params.delta.ravel(), np.log(params.tau)])


def unflatten_state(vec, r, q, l):
    """Inverse of :func:`flatten_state` for an r-component model."""
    vec = np.asarray(vec, dtype=float)
    n_alpha = r * q
    n_beta = r * l
    n_delta = (r - 1) * q
    alpha = vec[:n_alpha].reshape(r, q).copy()
    beta = vec[n_alpha:n_alpha + n_beta].reshape(r, l).copy()
    delta = vec[n_alpha + n_beta:n_alpha + n_beta + n_delta].reshape(r - 1, q).copy()
    with np.errstate(over="ignore"):
        tau = np.exp(vec[n_alpha + n_beta + n_delta:])
    return MixtureParams(alpha=alpha, beta=beta, tau=tau, delta=delta)


def permute_components(params, order):
    """Relabel the mixture components so new slot j holds old slot order[j].

    Gating rows are stored relative to the first component, so the
    permutation acts on the full row stack (a zero row prepended) and the
    result is re-based on its new leading row.  The map leaves the
    mixture surface unchanged and has unit Jacobian in the flattened
    coordinates.
    """
    order = np.asarray(order, dtype=int)
    eta = np.vstack([np.zeros((1, params.delta.shape[1])), params.delta])
    eta = eta[order]
    return MixtureParams(alpha=params.alpha[order].copy(),
                         beta=params.beta[order].copy(),
                         tau=params.tau[order].copy(),
                         delta=eta[1:] - eta[0])


def _ridged(cov):
    """Add a scale-aware diagonal ridge so the proposal stays full rank.

    Short pilot runs can leave the sample covariance rank deficient; the
    ridge tracks the average eigenvalue so it clears the relative
    positive-definiteness threshold regardless of the parameter scale.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    dim = cov.shape[0]
    ridge = PROPOSAL_RIDGE * (1.0 + float(np.trace(cov)) / dim)
    return cov + ridge * np.eye(dim)


@dataclass
class PilotStats:
    """Moments of one pilot chain's iterates in proposal coordinates."""

    r: int
    head_mean: np.ndarray
    head_cov: np.ndarray
    delta_acceptance: float
    draw_count: int


class PilotSummary:
    """Per-model pilot moments plus the frozen proposals built from them."""

    def __init__(self, stats, q, rank):
        self.stats = stats
        self.q = q
        self.rank = rank
        self._head = {r: MvtProposal(st.head_mean, _ridged(st.head_cov))
                      for r, st in stats.items()}

    def head_proposal(self, r):
        """Joint proposal over (alpha, beta, delta, log tau) for r components."""
        return self._head[r]

    def initial_params(self, r):
        """State at the pilot mean of the proposal coordinates.

        Pilot iterates keep their log variances strictly decreasing, and
        coordinate-wise averaging preserves that, so the mean is always a
        valid starting state.
        """
        return unflatten_state(self.stats[r].head_mean, r, self.q, self.rank)


def _dispersed_start(ctx, r, rng):
    prior = ctx.prior
    q, l = ctx.q, ctx.rank
    tau = prior.c_tau * 2.0 ** -np.arange(1, r + 1)
    alpha = 0.1 * rng.normal(0.0, np.sqrt(prior.c_alpha), (r, q))
    beta = 0.1 * rng.normal(0.0, 1.0, (r, l)) * np.sqrt(tau)[:, None]
    delta = 0.1 * rng.normal(0.0, np.sqrt(prior.c_delta), (r - 1, q))
    return MixtureParams(alpha=alpha, beta=beta, tau=tau, delta=delta)


def run_pilots(ctx, rng, burnin=1000, length=2000):
    """Run one within-model pilot chain per component count.

    Each count gets its own generator substream and a dispersed start
    (prior draws scaled by 0.1; smoothing variances on the geometric
    ladder c_tau * 2^-j).  Post-burn-in iterates supply the joint moments
    the between-model proposals are built from, with the smoothing
    variances entering on the log scale where their conditional is
    roughly symmetric.
    """
    if length < 2:
        raise ValueError("pilot length must be at least 2")
    R = ctx.prior.max_components
    streams = rng.spawn(R)
    stats = {}
    for r in range(1, R + 1):
        sub = streams[r - 1]
        params = _dispersed_start(ctx, r, sub)
        dim = r * ctx.q + r * ctx.rank + (r - 1) * ctx.q + r
        heads = np.empty((length, dim))
        accepted = 0
        for it in range(burnin + length):
            params, _, acc = within_sweep(params, ctx, sub)
            accepted += bool(acc)
            if it >= burnin:
                heads[it - burnin] = flatten_state(params)
        if r > 1 and accepted == 0:
            raise NumericalError(
                f"pilot chain for {r} components never accepted a gating update")
        stats[r] = PilotStats(
            r=r,
            head_mean=heads.mean(axis=0),
            head_cov=np.atleast_2d(np.cov(heads, rowvar=False)),
            delta_acceptance=accepted / (burnin + length),
            draw_count=length,
        )
        logger.info("pilot r=%d done: gating acceptance %.2f",
                    r, stats[r].delta_acceptance)
    return PilotSummary(stats, ctx.q, ctx.rank)


def propose_r(r, R, rng):
    """Propose a neighboring component count.

    Returns (proposal, log q(proposal -> current) - log q(current -> proposal)).
    Interior counts move up or down with probability 1/2; the endpoints
    move inward with probability 1.
    """
    if R == 1:
        return 1, 0.0
    if r == 1:
        rp = 2
    elif r == R:
        rp = R - 1
    else:
        rp = r + 1 if rng.random() < 0.5 else r - 1

    def q(a):
        return 1.0 if a == 1 or a == R else 0.5

    return rp, float(np.log(q(rp)) - np.log(q(r)))


def tau_in_support(tau, c_tau):
    """True when tau sits inside the ordered prior's support.

    The prior is flat on strictly decreasing vectors with entries in
    (0, c_tau); the conditional sampler additionally floors each entry at
    TAU_FLOOR, so the same box applies here.
    """
    tau = np.asarray(tau, dtype=float)
    return bool(np.all(np.isfinite(tau)) and tau[0] < c_tau
                and tau[-1] > TAU_FLOOR and np.all(np.diff(tau) < 0.0))


def _proposal_logpdf(pilots, params):
    """Log proposal density of a sorted state, summed over relabelings.

    The sampler draws from the fitted t and then sorts the components, so
    a sorted state can arise from any of its r! relabelings; each has
    unit Jacobian, making the density an even mixture of the t density
    over the permutation images.
    """
    mvt = pilots.head_proposal(params.r)
    if params.r == 1:
        return mvt.logpdf(flatten_state(params))
    terms = [mvt.logpdf(flatten_state(permute_components(params, order)))
             for order in permutations(range(params.r))]
    return float(logsumexp(terms))


def _ordered_log_tau_prior(params, prior):
    """Ordered-flat smoothing variance prior as a density over log variances.

    Flat on the decreasing cone in natural scale means r!/c_tau^r there;
    the change to log coordinates multiplies in prod(tau_j).
    """
    if not tau_in_support(params.tau, prior.c_tau):
        return -np.inf
    r = params.r
    return (math.lgamma(r + 1) - r * math.log(prior.c_tau)
            + float(np.log(params.tau).sum()))


def rj_log_ratio(ctx, pilots, cur_params, cur_ll, prop_params, prop_ll, log_q_r):
    """Log acceptance ratio of a between-model move.

    Both states are measured in log smoothing-variance coordinates, the
    same ones the proposal samples in.  Likelihood, coefficient priors,
    the ordered variance prior, the model prior and both full proposal
    densities enter; nothing carries over from the destination model's
    previous visit.
    """
    mp = ctx.prior.model_prior_vector()
    lr = prop_ll - cur_ll
    lr += coefficient_log_prior(prop_params, ctx.prior)
    lr -= coefficient_log_prior(cur_params, ctx.prior)
    lr += _ordered_log_tau_prior(prop_params, ctx.prior)
    lr -= _ordered_log_tau_prior(cur_params, ctx.prior)
    lr += float(np.log(mp[prop_params.r - 1]) - np.log(mp[cur_params.r - 1]))
    lr += log_q_r
    lr += _proposal_logpdf(pilots, cur_params) - _proposal_logpdf(pilots, prop_params)
    return lr


@dataclass
class DrawRecord:
    """One retained posterior draw."""

    iteration: int
    r: int
    alpha: np.ndarray
    beta: np.ndarray
    tau: np.ndarray
    delta: np.ndarray
    loglik: float


@dataclass
class ChainTrace:
    """Retained draws plus the per-iteration move log."""

    draws: list
    proposed_r: np.ndarray
    move_accepted: np.ndarray
    move_log_ratio: np.ndarray
    delta_accepted: np.ndarray
    warmup: int
    sampling: int
    thin: int

    def model_probabilities(self, max_components):
        counts = np.bincount([d.r for d in self.draws], minlength=max_components + 1)
        return counts[1:] / max(1, len(self.draws))

    def rj_acceptance_rate(self):
        post = self.move_accepted[self.warmup:]
        return float(post.mean()) if post.size else 0.0

    def delta_acceptance_rate(self):
        post = self.delta_accepted[self.warmup:]
        return float(post.mean()) if post.size else 0.0


class Chain:
    """Markov chain over the component count and its parameters.

    Between-model moves redraw every block of the destination model from
    the pilot proposals, so the chain's law depends only on the active
    snapshot; the inactive ones are kept so :meth:`state_dict` stays a
    complete picture of the object.  A restored chain continues
    identically.
    """

    def __init__(self, ctx, pilots, rng, model_states=None, r=None):
        self.ctx = ctx
        self.pilots = pilots
        self.rng = rng
        R = ctx.prior.max_components
        if model_states is None:
            model_states = {s: pilots.initial_params(s) for s in range(1, R + 1)}
        self.model_states = model_states
        if r is None:
            mp = ctx.prior.model_prior_vector()
            r = int(rng.choice(np.arange(1, R + 1), p=mp))
        self.r = r
        self.iteration = 0
        self.proposed_r = []
        self.move_accepted = []
        self.move_log_ratio = []
        self.delta_accepted = []
        self.refresh_loglik()

    @property
    def params(self):
        return self.model_states[self.r]

    def refresh_loglik(self):
        """Recompute the cached likelihood (needed after a response swap)."""
        self.ll = observed_loglik(self.params, self.ctx.dataset.responses,
                                  self.ctx.Z, self.ctx.X)
        return self.ll

    def set_context(self, ctx):
        self.ctx = ctx
        self.refresh_loglik()

    def _propose_params(self, rp):
        """Draw a complete candidate state for an rp-component model.

        The raw draw is relabeled so the log smoothing variances
        decrease.  Returns None when the variances still land outside the
        ordered prior's support (out of the box, or tied); the caller
        treats that as an instant rejection, which is exact because the
        target density there is zero.
        """
        vec = self.pilots.head_proposal(rp).sample(self.rng)
        params = unflatten_state(vec, rp, self.ctx.q, self.ctx.rank)
        if rp > 1:
            params = permute_components(params, np.argsort(-params.tau))
        if not tau_in_support(params.tau, self.ctx.prior.c_tau):
            return None
        return params

    def _rj_step(self):
        R = self.ctx.prior.max_components
        if R == 1:
            self.proposed_r.append(1)
            self.move_accepted.append(False)
            self.move_log_ratio.append(0.0)
            return
        rp, log_q_r = propose_r(self.r, R, self.rng)
        prop = self._propose_params(rp)
        if prop is None:
            self.proposed_r.append(rp)
            self.move_accepted.append(False)
            self.move_log_ratio.append(-np.inf)
            return
        prop_ll = observed_loglik(prop, self.ctx.dataset.responses,
                                  self.ctx.Z, self.ctx.X)
        lr = rj_log_ratio(self.ctx, self.pilots, self.params, self.ll,
                          prop, prop_ll, log_q_r)
        accept = np.log(max(self.rng.random(), 1e-300)) < lr
        self.proposed_r.append(rp)
        self.move_accepted.append(bool(accept))
        self.move_log_ratio.append(float(lr))
        if accept:
            self.r = rp
            self.model_states[rp] = prop
            self.ll = prop_ll

    def step(self):
        """One between-model move followed by one conditional sweep."""
        self._rj_step()
        params, _, acc = within_sweep(self.params, self.ctx, self.rng)
        self.model_states[self.r] = params
        self.delta_accepted.append(bool(acc))
        self.refresh_loglik()
        self.iteration += 1

    def record(self):
        p = self.params
        return DrawRecord(iteration=self.iteration, r=self.r,
                          alpha=p.alpha.copy(), beta=p.beta.copy(),
                          tau=p.tau.copy(), delta=p.delta.copy(),
                          loglik=self.ll)

    def state_dict(self):
        return {
            "iteration": self.iteration,
            "r": self.r,
            "rng_state": self.rng.bit_generator.state,
            "model_states": {
                str(r): {
                    "alpha": p.alpha.copy(), "beta": p.beta.copy(),
                    "tau": p.tau.copy(), "delta": p.delta.copy(),
                }
                for r, p in self.model_states.items()
            },
        }

    def load_state_dict(self, state):
        self.iteration = int(state["iteration"])
        self.r = int(state["r"])
        self.rng.bit_generator.state = state["rng_state"]
        self.model_states = {
            int(r): MixtureParams(alpha=np.asarray(p["alpha"], float),
                                  beta=np.asarray(p["beta"], float),
                                  tau=np.asarray(p["tau"], float),
                                  delta=np.asarray(p["delta"], float))
            for r, p in state["model_states"].items()
        }
        self.refresh_loglik()
        return self


def run_chain(ctx, pilots, rng, warmup=5000, sampling=5000, thin=1, chain=None):
    """Drive a chain for warmup + sampling iterations and keep post-warmup
    draws every ``thin`` iterations."""
    if thin < 1:
        raise ValueError("thin must be a positive integer")
    if chain is None:
        chain = Chain(ctx, pilots, rng)
    draws = []
    for i in range(warmup + sampling):
        chain.step()
        if i >= warmup and (i - warmup) % thin == 0:
            draws.append(chain.record())
    return ChainTrace(
        draws=draws,
        proposed_r=np.asarray(chain.proposed_r, dtype=np.int64),
        move_accepted=np.asarray(chain.move_accepted, dtype=bool),
        move_log_ratio=np.asarray(chain.move_log_ratio, dtype=float),
        delta_accepted=np.asarray(chain.delta_accepted, dtype=bool),
        warmup=warmup,
        sampling=sampling,
        thin=thin,
    )
