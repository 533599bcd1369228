"""Metropolis dynamics: determinism, exact identities, spectral analysis."""
import math
from fractions import Fraction

import numpy as np
import pytest

from hypising import dynamics, energy, lattice
from hypising.energy import SpinConfig, delta_h
from hypising.errors import CapacityError, DomainError, InsufficientSamplesError
from hypising.params import ModelParams


@pytest.fixture(scope="module")
def g45():
    return lattice.build(4, 5, 1)


@pytest.fixture(scope="module")
def p45():
    return ModelParams(4, 5, 1, Fraction(19, 10), 2.0)


def test_fixed_seed_identical_trajectory(g45, p45):
    s1 = dynamics.hit(g45, p45, SpinConfig.all_plus(g45), "all_minus",
                      10 ** 6, seed=3, replicas=6)
    s2 = dynamics.hit(g45, p45, SpinConfig.all_plus(g45), "all_minus",
                      10 ** 6, seed=3, replicas=6)
    assert [(x.steps, x.seed, x.censored) for x in s1] == \
           [(x.steps, x.seed, x.censored) for x in s2]
    s3 = dynamics.hit(g45, p45, SpinConfig.all_plus(g45), "all_minus",
                      10 ** 6, seed=4, replicas=6)
    assert [x.steps for x in s3] != [x.steps for x in s1]


def test_step_time_advances_and_cache_coherent(g45, p45):
    st = dynamics.ChainState.start(g45, SpinConfig.all_minus(g45), seed=7)
    st = dynamics.step(st, g45, p45, 500)
    assert st.time == 500
    assert st.energy.as_tuple() == delta_h(g45, st.config).as_tuple()


def test_no_uphill_acceptance_at_huge_beta(g45):
    frozen = ModelParams(4, 5, 1, Fraction(19, 10), 60.0)
    st = dynamics.ChainState.start(g45, SpinConfig.all_minus(g45), seed=1)
    st = dynamics.step(st, g45, frozen, 2000)
    # every move from all-minus costs q-h = 3.1: never accepted at beta=60
    assert st.config.plus_count == 0
    assert st.time == 2000


def test_beta_zero_always_accepts(g45):
    free = ModelParams(4, 5, 1, Fraction(19, 10), 0.0)
    st = dynamics.ChainState.start(g45, SpinConfig.all_minus(g45), seed=2)
    st2 = dynamics.step(st, g45, free, 1)
    assert st2.config.plus_count == 1


def test_beta_zero_hitting_finite_and_reproducible():
    g = lattice.build(4, 5, 0)
    free = ModelParams(4, 5, 0, Fraction(1), 0.0)
    a = dynamics.hit(g, free, SpinConfig.all_minus(g), "all_plus", 10 ** 6,
                     seed=11, replicas=20)
    b = dynamics.hit(g, free, SpinConfig.all_minus(g), "all_plus", 10 ** 6,
                     seed=11, replicas=20)
    assert not any(x.censored for x in a)
    assert [x.steps for x in a] == [x.steps for x in b]


def test_start_inside_target_counts_first_return(g45):
    stiff = ModelParams(4, 5, 1, Fraction(19, 10), 50.0)
    s = dynamics.hit(g45, stiff, SpinConfig.all_minus(g45), "all_minus",
                     10 ** 4, seed=5, replicas=4)
    assert all(x.steps == 1 and not x.censored for x in s)


def test_censoring_is_data(g45):
    stiff = ModelParams(4, 5, 1, Fraction(19, 10), 50.0)
    s = dynamics.hit(g45, stiff, SpinConfig.all_minus(g45), "all_plus",
                     5000, seed=5, replicas=3)
    assert all(x.censored and x.steps == 5000 for x in s)


def test_energy_cache_audit_clean(g45, p45):
    s = dynamics.hit(g45, p45, SpinConfig.all_plus(g45), "all_minus",
                     10 ** 6, seed=9, replicas=3, audit_every=1 << 12)
    assert all(not x.censored for x in s)


def test_interior_plus_target():
    g = lattice.build(5, 5, 2)
    mp = ModelParams(5, 5, 2, Fraction(56, 25), 2.2)
    s = dynamics.hit(g, mp, SpinConfig.all_minus(g), "interior_plus",
                     10 ** 8, seed=13, replicas=2)
    assert all(not x.censored for x in s)


def test_unknown_target_rejected(g45, p45):
    with pytest.raises(DomainError):
        dynamics.hit(g45, p45, SpinConfig.all_minus(g45), "plus_phase", 10, 0, 1)


def test_detailed_balance_audit(g45, p45):
    rep = dynamics.detailed_balance_audit(g45, p45, 3000, seed=1)
    assert rep.ok
    assert rep.checked == 3000


def test_acceptance_rate_decays_with_min_uphill(g45):
    # from all-minus every proposal is uphill by exactly q-h, so the
    # first-step acceptance probability is exp(-beta (q-h)); sample it
    # across independent seeds
    h = Fraction(19, 10)
    trials = 4000
    for beta in (1.0, 1.5):
        mp = ModelParams(4, 5, 1, h, beta)
        accepted = 0
        for seed in range(trials):
            st = dynamics.ChainState.start(g45, SpinConfig.all_minus(g45), seed=seed)
            st2 = dynamics.step(st, g45, mp, 1)
            accepted += st2.config.plus_count  # 1 iff the proposal was accepted
        expected = math.exp(-beta * 3.1)
        assert abs(accepted / trials - expected) < 4 * math.sqrt(expected / trials) + 0.002


# ---------------------------------------------------------------------------
# exact chain analysis
# ---------------------------------------------------------------------------

def test_gap_beta_zero_hypercube():
    g = lattice.build(4, 5, 0)
    res = dynamics.spectral_gap_power(g, ModelParams(4, 5, 0, Fraction(1), 0.0))
    assert abs(res["gap"] - 2 / 4) < 1e-10


@pytest.mark.parametrize("pq_n,h,beta", [
    ((4, 5, 0), Fraction(1), 2.0),
    ((4, 5, 0), Fraction(2), 3.0),
    ((5, 4, 0), Fraction(3, 2), 1.5),
    ((7, 7, 0), Fraction(5, 2), 2.0),
])
def test_gap_power_matches_dense(pq_n, h, beta):
    p, q, n = pq_n
    g = lattice.build(p, q, n)
    mp = ModelParams(p, q, n, h, beta)
    gp = dynamics.spectral_gap_power(g, mp)
    gd = dynamics.spectral_gap_dense(g, mp)
    assert abs(gp["gap"] - gd) < 5e-10


def test_two_state_gap_closed_form():
    a, b = 0.31, 0.07
    P = np.array([[1 - a, a], [b, 1 - b]])
    ev = np.sort(np.linalg.eigvals(P).real)
    assert abs((1 - ev[0]) - (a + b)) < 1e-14


def test_mixing_time_monotone_in_eps():
    g = lattice.build(4, 5, 0)
    mp = ModelParams(4, 5, 0, Fraction(1), 2.0)
    res = dynamics.mixing_time(g, mp, (0.4, 0.25, 0.1))
    assert res[0.4] <= res[0.25] <= res[0.1]


def test_exact_chain_analysis_caps():
    g = lattice.build(4, 5, 1)   # 24 sites: over both caps
    mp = ModelParams(4, 5, 1, Fraction(19, 10), 2.0)
    with pytest.raises(CapacityError):
        dynamics.spectral_gap_power(g, mp)
    with pytest.raises(CapacityError):
        dynamics.mixing_time(g, mp)


# ---------------------------------------------------------------------------
# tail statistics
# ---------------------------------------------------------------------------

def test_tail_statistics_synthetic_exponential():
    rng = np.random.default_rng(0)
    n = 4000
    samples = rng.exponential(scale=1000.0, size=n).astype(np.int64) + 1
    rep = dynamics.tail_statistics(samples, t_values=(0.5, 1.0, 2.0))
    for row in rep.rows:
        assert row["deviation"] < 3 / math.sqrt(n)


def test_tail_t_zero_is_one():
    rng = np.random.default_rng(1)
    samples = rng.exponential(scale=50.0, size=200).astype(np.int64) + 1
    rep = dynamics.tail_statistics(samples, t_values=(0.0, 1.0))
    assert rep.rows[0]["empirical"] == 1.0


def test_tail_insufficient_samples():
    with pytest.raises(InsufficientSamplesError):
        dynamics.tail_statistics([10] * 20)


def test_tail_excludes_censored(g45, p45):
    samples = [dynamics.HittingTimeSample(i, i, 100 + i, False, "all_minus")
               for i in range(60)]
    samples.append(dynamics.HittingTimeSample(60, 60, 10 ** 9, True, "all_minus"))
    rep = dynamics.tail_statistics(samples)
    assert rep.n_samples == 60


def test_tail_on_real_escape_distribution(g45):
    # hitting times from a metastable corner are asymptotically exponential;
    # at beta=3 on (4,5,N=1) the empirical tail at T-hat should be near 1/e
    mp = ModelParams(4, 5, 1, Fraction(19, 10), 3.0)
    s = dynamics.hit(g45, mp, SpinConfig.all_plus(g45), "all_minus",
                     10 ** 8, seed=12, replicas=100)
    rep = dynamics.tail_statistics(s, t_values=(1.0,))
    assert abs(rep.rows[0]["empirical"] - math.exp(-1)) <= 0.15
