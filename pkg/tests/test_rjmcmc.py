"""Between-model proposals, pilot summaries, and the chain driver."""

import numpy as np
import pytest
from scipy import stats
from scipy.special import digamma, ndtr, polygamma

from mixprobit.basis import Dataset, build_expansion
from mixprobit.model import (
    MixtureParams,
    PriorConfig,
    mixture_probabilities,
    observed_loglik,
)
from mixprobit.rjmcmc import (
    Chain,
    PilotStats,
    PilotSummary,
    flatten_state,
    permute_components,
    propose_r,
    rj_log_ratio,
    run_chain,
    run_pilots,
    unflatten_state,
)
from mixprobit.rjmcmc import _proposal_logpdf
from mixprobit.within import FitContext


def _context(n=150, seed=0, R=2):
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    w = (rng.random(n) < 0.3 + 0.4 * x).astype(int)
    ds = Dataset.from_arrays(x, w)
    prior = PriorConfig(c_alpha=25.0, c_tau=100.0, max_components=R)
    return FitContext.build(ds, build_expansion(ds), prior)


def test_propose_r_interior_is_symmetric_coin():
    rng = np.random.default_rng(1)
    picks = [propose_r(2, 3, rng)[0] for _ in range(4000)]
    frac_up = np.mean(np.asarray(picks) == 3)
    assert set(picks) == {1, 3}
    assert abs(frac_up - 0.5) < 0.03


def test_propose_r_correction_terms():
    rng = np.random.default_rng(2)
    # moving from the interior to an endpoint gains log 2, and back loses it
    rp, corr = propose_r(1, 3, rng)
    assert rp == 2 and np.isclose(corr, -np.log(2.0))
    rp, corr = propose_r(3, 3, rng)
    assert rp == 2 and np.isclose(corr, -np.log(2.0))
    rp, corr = propose_r(2, 3, rng)
    assert rp in (1, 3) and np.isclose(corr, np.log(2.0))
    # with two models both counts are endpoints
    rp, corr = propose_r(1, 2, rng)
    assert rp == 2 and corr == 0.0
    rp, corr = propose_r(1, 1, rng)
    assert rp == 1 and corr == 0.0


def test_flatten_state_round_trip():
    rng = np.random.default_rng(3)
    r, q, l = 3, 2, 5
    params = MixtureParams(alpha=rng.normal(size=(r, q)),
                           beta=rng.normal(size=(r, l)),
                           tau=np.array([3.0, 2.0, 1.0]),
                           delta=rng.normal(size=(r - 1, q)))
    vec = flatten_state(params)
    assert vec.shape == (r * q + r * l + (r - 1) * q + r,)
    back = unflatten_state(vec, r, q, l)
    np.testing.assert_array_equal(back.alpha, params.alpha)
    np.testing.assert_array_equal(back.beta, params.beta)
    np.testing.assert_array_equal(back.delta, params.delta)
    np.testing.assert_allclose(back.tau, params.tau, rtol=1e-14)


def _random_params(rng, r, q, l):
    return MixtureParams(alpha=rng.normal(size=(r, q)),
                         beta=rng.normal(size=(r, l)),
                         tau=np.sort(rng.uniform(0.5, 8.0, r))[::-1].copy(),
                         delta=rng.normal(size=(r - 1, q)))


def test_permute_components_preserves_the_likelihood():
    ctx = _context(n=40, seed=14, R=3)
    rng = np.random.default_rng(15)
    params = _random_params(rng, 3, ctx.q, ctx.rank)
    base = observed_loglik(params, ctx.dataset.responses, ctx.Z, ctx.X)
    from itertools import permutations as _perms
    for order in _perms(range(3)):
        moved = permute_components(params, order)
        ll = observed_loglik(moved, ctx.dataset.responses, ctx.Z, ctx.X)
        np.testing.assert_allclose(ll, base, rtol=1e-12)
    # applying a permutation and then its inverse restores the state
    order = np.array([2, 0, 1])
    inverse = np.argsort(order)
    back = permute_components(permute_components(params, order), inverse)
    np.testing.assert_allclose(back.alpha, params.alpha, atol=1e-12)
    np.testing.assert_allclose(back.delta, params.delta, atol=1e-12)
    np.testing.assert_allclose(back.tau, params.tau, atol=1e-12)


@pytest.fixture(scope="module")
def pilot_setup():
    ctx = _context()
    pilots = run_pilots(ctx, np.random.default_rng(4), burnin=50, length=80)
    return ctx, pilots


def test_pilot_summary_dimensions(pilot_setup):
    ctx, pilots = pilot_setup
    q, l = ctx.q, ctx.rank
    for r in (1, 2):
        st = pilots.stats[r]
        dim = r * q + r * l + (r - 1) * q + r
        assert st.head_mean.shape == (dim,)
        assert st.head_cov.shape == (dim, dim)
        assert 0.0 <= st.delta_acceptance <= 1.0
        init = pilots.initial_params(r)
        init.validate(ctx.prior)
        assert np.all(np.diff(init.tau) < 0) or r == 1
        assert pilots.head_proposal(r).dim == dim


def test_proposal_density_is_relabeling_invariant(pilot_setup):
    # the chain only ever evaluates sorted states, but the symmetrized
    # density must not care which relabeling of a state it is handed
    ctx, pilots = pilot_setup
    rng = np.random.default_rng(16)
    params = _random_params(rng, 2, ctx.q, ctx.rank)
    base = _proposal_logpdf(pilots, params)
    swapped = permute_components(params, [1, 0])
    np.testing.assert_allclose(_proposal_logpdf(pilots, swapped), base,
                               rtol=1e-12)


def test_pilots_are_reproducible():
    ctx = _context(n=80, seed=5)
    a = run_pilots(ctx, np.random.default_rng(6), burnin=20, length=40)
    b = run_pilots(ctx, np.random.default_rng(6), burnin=20, length=40)
    for r in a.stats:
        np.testing.assert_array_equal(a.stats[r].head_mean,
                                      b.stats[r].head_mean)
        np.testing.assert_array_equal(a.stats[r].head_cov,
                                      b.stats[r].head_cov)


def test_rj_log_ratio_antisymmetry(pilot_setup):
    ctx, pilots = pilot_setup
    cur = pilots.initial_params(1)
    prop = pilots.initial_params(2)
    ll_cur = observed_loglik(cur, ctx.dataset.responses, ctx.Z, ctx.X)
    ll_prop = observed_loglik(prop, ctx.dataset.responses, ctx.Z, ctx.X)
    fwd = rj_log_ratio(ctx, pilots, cur, ll_cur, prop, ll_prop, 0.0)
    rev = rj_log_ratio(ctx, pilots, prop, ll_prop, cur, ll_cur, 0.0)
    assert np.isfinite(fwd)
    np.testing.assert_allclose(fwd, -rev, atol=1e-10)
    # the proposal-probability correction enters additively
    shifted = rj_log_ratio(ctx, pilots, cur, ll_cur, prop, ll_prop,
                           np.log(2.0))
    np.testing.assert_allclose(shifted - fwd, np.log(2.0), atol=1e-12)


def test_run_chain_trace_shapes(pilot_setup):
    ctx, pilots = pilot_setup
    trace = run_chain(ctx, pilots, np.random.default_rng(7), warmup=20,
                      sampling=30, thin=3)
    assert len(trace.draws) == 10
    assert trace.proposed_r.shape == (50,)
    assert trace.move_accepted.shape == (50,)
    assert set(np.unique(trace.proposed_r)) <= {1, 2}
    probs = trace.model_probabilities(2)
    assert probs.shape == (2,)
    np.testing.assert_allclose(probs.sum(), 1.0)
    assert 0.0 <= trace.rj_acceptance_rate() <= 1.0
    for d in trace.draws:
        assert d.r in (1, 2)
        assert d.alpha.shape == (d.r, ctx.q)
        assert np.isfinite(d.loglik)


def test_run_chain_reproducible(pilot_setup):
    ctx, pilots = pilot_setup
    t1 = run_chain(ctx, pilots, np.random.default_rng(8), warmup=15,
                   sampling=25)
    t2 = run_chain(ctx, pilots, np.random.default_rng(8), warmup=15,
                   sampling=25)
    np.testing.assert_array_equal(t1.proposed_r, t2.proposed_r)
    np.testing.assert_array_equal(t1.move_accepted, t2.move_accepted)
    for d1, d2 in zip(t1.draws, t2.draws):
        assert d1.r == d2.r
        np.testing.assert_array_equal(d1.alpha, d2.alpha)
        np.testing.assert_array_equal(d1.tau, d2.tau)
        assert d1.loglik == d2.loglik


def test_chain_state_round_trip_resumes_identically(pilot_setup):
    ctx, pilots = pilot_setup
    chain_a = Chain(ctx, pilots, np.random.default_rng(9))
    for _ in range(30):
        chain_a.step()
    snapshot = chain_a.state_dict()
    continued = [chain_a.step() or chain_a.record() for _ in range(20)]

    chain_b = Chain(ctx, pilots, np.random.default_rng(999))
    chain_b.load_state_dict(snapshot)
    assert chain_b.r == snapshot["r"]
    resumed = [chain_b.step() or chain_b.record() for _ in range(20)]
    for da, db in zip(continued, resumed):
        assert da.r == db.r
        assert da.iteration == db.iteration
        np.testing.assert_array_equal(da.alpha, db.alpha)
        np.testing.assert_array_equal(da.beta, db.beta)
        np.testing.assert_array_equal(da.tau, db.tau)
        np.testing.assert_array_equal(da.delta, db.delta)
        assert da.loglik == db.loglik


def test_chain_visits_both_models():
    # small flat dataset with tight prior scales: the posterior over the
    # component count stays near the prior, so the chain must hop
    rng = np.random.default_rng(10)
    x = rng.random(30)
    w = (rng.random(30) < 0.5).astype(int)
    ds = Dataset.from_arrays(x, w)
    prior = PriorConfig(c_alpha=4.0, c_tau=10.0, c_delta=30.0,
                        max_components=2)
    ctx = FitContext.build(ds, build_expansion(ds, l_max=5), prior)
    pilots = run_pilots(ctx, np.random.default_rng(11), burnin=200,
                        length=600)
    trace = run_chain(ctx, pilots, np.random.default_rng(12), warmup=100,
                      sampling=400)
    probs = trace.model_probabilities(2)
    assert probs[0] > 0.05 and probs[1] > 0.05
    assert trace.rj_acceptance_rate() > 0.05


def test_single_model_space_never_moves(pilot_setup):
    ctx = _context(n=60, seed=11, R=1)
    pilots = run_pilots(ctx, np.random.default_rng(12), burnin=10, length=30)
    trace = run_chain(ctx, pilots, np.random.default_rng(13), warmup=5,
                      sampling=20)
    assert np.all(trace.proposed_r == 1)
    assert not np.any(trace.move_accepted)
    np.testing.assert_allclose(trace.model_probabilities(1), [1.0])
