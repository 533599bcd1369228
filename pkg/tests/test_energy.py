"""Exact energies, flip deltas, and cluster decomposition."""
from fractions import Fraction

import numpy as np
import pytest

from hypising import energy, lattice
from hypising.energy import ExactEnergy, SpinConfig
from hypising.errors import DomainError


@pytest.fixture(scope="module")
def g55():
    return lattice.build(5, 5, 3)


@pytest.fixture(scope="module")
def g45():
    return lattice.build(4, 5, 1)


def test_exact_energy_comparisons():
    h = Fraction(19, 10)
    a = ExactEnergy(5, 1)
    b = ExactEnergy(8, 2)
    # 5 - 1.9 = 3.1 vs 8 - 3.8 = 4.2
    assert a.key(h) < b.key(h)
    assert a.value(h) == Fraction(31, 10)
    assert (a + b).as_tuple() == (13, 3)
    assert (a - b).as_tuple() == (-3, -1)
    assert ExactEnergy(10, 5).key(Fraction(2)) == 0  # exact tie at h = 2


def test_all_minus_reference(g55):
    assert energy.delta_h(g55, SpinConfig.all_minus(g55)).as_tuple() == (0, 0)


def test_single_interior_plus(g55):
    s = SpinConfig.all_minus(g55)
    s.flip(g55.vertex_id(1, 5))
    assert energy.delta_h(g55, s).as_tuple() == (5, 1)


def test_full_first_layer_ball(g55):
    s = SpinConfig.from_plus_ids(g55, range(5))
    assert energy.delta_h(g55, s).as_tuple() == (15, 5)   # p(q-2), p


def test_all_plus_closed_form(g55):
    e = energy.delta_h(g55, SpinConfig.all_plus(g55))
    assert e.as_tuple() == (3 * 1885 - 720, 2205)


def test_flip_in_all_minus_interior_and_boundary(g55):
    s = SpinConfig.all_minus(g55)
    assert energy.flip_delta(g55, s, (1, 4)).as_tuple() == (5, 1)
    # E-class boundary vertex: 2 internal + (q-2) frozen disagreements
    sl = g55.layer_slice(3)
    e_idx = int(np.nonzero(g55.cls[sl] == 0)[0][0])
    assert energy.flip_delta(g55, s, (3, e_idx)).as_tuple() == (5, 1)
    i_idx = int(np.nonzero(g55.cls[sl] == 1)[0][0])
    assert energy.flip_delta(g55, s, (3, i_idx)).as_tuple() == (5, 1)


def test_double_flip_is_involution(g45):
    rng = np.random.default_rng(5)
    for _ in range(50):
        s = SpinConfig(rng.integers(0, 2, g45.n_vertices, dtype=np.uint8))
        v = int(rng.integers(0, g45.n_vertices))
        d1 = energy.flip_delta(g45, s, v)
        s.flip(v)
        d2 = energy.flip_delta(g45, s, v)
        assert (d1 + d2).as_tuple() == (0, 0)


def test_flip_delta_equals_global_difference(g45):
    rng = np.random.default_rng(17)
    for _ in range(300):
        s = SpinConfig(rng.integers(0, 2, g45.n_vertices, dtype=np.uint8))
        v = int(rng.integers(0, g45.n_vertices))
        before = energy.delta_h(g45, s)
        d = energy.flip_delta(g45, s, v)
        s.flip(v)
        after = energy.delta_h(g45, s)
        assert (after - before).as_tuple() == d.as_tuple()


def test_clusters_empty_and_ball(g55):
    assert energy.clusters(g55, SpinConfig.all_minus(g55)).clusters == []
    s = SpinConfig.from_plus_ids(g55, range(5))
    cs = energy.clusters(g55, s).clusters
    assert len(cs) == 1
    assert cs[0].area == 5 and cs[0].perimeter == 15


def test_two_isolated_pluses(g55):
    s = SpinConfig.from_plus_ids(g55, [g55.vertex_id(1, 0), g55.vertex_id(2, 40)])
    cs = energy.clusters(g55, s).clusters
    assert len(cs) == 2
    assert all(c.area == 1 and c.perimeter == 5 for c in cs)
    # additivity of disjoint contours
    assert energy.delta_h(g55, s).as_tuple() == (10, 2)


def test_cluster_perimeters_sum_to_u(g45):
    rng = np.random.default_rng(23)
    for _ in range(200):
        s = SpinConfig(rng.integers(0, 2, g45.n_vertices, dtype=np.uint8))
        e = energy.delta_h(g45, s)
        cs = energy.clusters(g45, s)
        assert cs.total_perimeter == e.u
        assert cs.total_area == e.n == s.plus_count


def test_size_mismatch_raises(g55, g45):
    s = SpinConfig.all_minus(g45)
    with pytest.raises(DomainError):
        energy.delta_h(g55, s)
    with pytest.raises(DomainError):
        energy.flip_delta(g55, s, 0)


def test_state_int_round_trip(g45):
    s = SpinConfig.from_state_int(g45, 0b1011)
    assert s.plus_count == 3
    assert s.to_state_int() == 0b1011
