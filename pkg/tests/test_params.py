"""Closed-form constants: transfer matrix, eigenvalues, thresholds, radii."""
import math
from fractions import Fraction

import mpmath as mp
import pytest

from hypising import params
from hypising.errors import DomainError

HYPERBOLIC_PQ = [(p, q) for p in range(4, 8) for q in range(4, 8)
                 if p * q - 2 * p - 2 * q > 0]


def test_transfer_matrix_4_5():
    sc = params.spectral_constants(4, 5)
    assert sc.T == ((2, 3), (1, 2))
    assert sc.lambda_plus == pytest.approx(2 + math.sqrt(3), abs=1e-12)
    assert sc.lambda_minus == pytest.approx(2 - math.sqrt(3), abs=1e-12)


def test_constants_5_5():
    sc = params.spectral_constants(5, 5)
    assert sc.lambda_plus == pytest.approx(6.8541, abs=5e-5)
    assert sc.lambda_minus == pytest.approx(0.1459, abs=5e-5)
    assert sc.c_pq == pytest.approx(5 / (2 * math.sqrt(15)), abs=1e-12)
    # frozen from direct high-precision evaluation of the closed forms:
    # a+- = sqrt(15) +- 3 sqrt(3)
    assert sc.a_plus == pytest.approx(math.sqrt(15) + 3 * math.sqrt(3), abs=1e-12)
    assert sc.a_minus == pytest.approx(math.sqrt(15) - 3 * math.sqrt(3), abs=1e-12)
    assert sc.a_plus == pytest.approx(9.069136, abs=1e-6)
    assert sc.a_minus == pytest.approx(-1.323169, abs=1e-6)


@pytest.mark.parametrize("p,q", HYPERBOLIC_PQ)
def test_eigen_identities(p, q):
    sc = params.spectral_constants(p, q)
    tr = sc.T[0][0] + sc.T[1][1]
    det = sc.T[0][0] * sc.T[1][1] - sc.T[0][1] * sc.T[1][0]
    assert sc.lambda_plus + sc.lambda_minus == pytest.approx(tr, abs=1e-12)
    assert sc.lambda_plus * sc.lambda_minus == pytest.approx(det, abs=1e-12)
    assert sc.lambda_plus + sc.lambda_minus == pytest.approx(2 + p * (q - 2) - 2 * q, abs=1e-12)
    assert sc.lambda_plus > sc.lambda_minus > 0
    assert sc.a_plus > 0 and sc.c_pq > 0


def test_hyperbolicity_domain_error():
    with pytest.raises(DomainError):
        params.spectral_constants(4, 4)
    with pytest.raises(DomainError):
        params.spectral_constants(3, 7)


def test_layer_counts_seed_and_small():
    for p, q in HYPERBOLIC_PQ:
        assert params.layer_counts(p, q, 0) == (0, p, p)
    assert params.layer_counts(5, 5, 1) == (15, 25, 40)
    assert params.layer_counts(4, 5, 2) == (48, 28, 76)


@pytest.mark.parametrize("p,q", [(4, 5), (5, 5), (5, 4), (7, 7)])
def test_layer_counts_match_closed_form(p, q):
    for n in range(31):
        i_n, _, l_n = params.layer_counts(p, q, n)
        i_cf = params.i_count_closed_form(p, q, n)
        l_cf = params.l_count_closed_form(p, q, n)
        if i_n:
            assert abs(i_cf - i_n) / i_n < 1e-6
        assert abs(l_cf - l_n) / l_n < 1e-6


def test_layer_counts_no_overflow():
    i_n, e_n, l_n = params.layer_counts(7, 7, 64)
    assert l_n == i_n + e_n
    assert l_n > 10 ** 80  # far beyond any fixed-width integer


def test_window_5_5_21():
    w = params.field_window(5, 5, 21)
    assert float(w.h1) == pytest.approx(2.2361, abs=5e-5)
    assert w.h2 == pytest.approx(2.25, abs=1e-9)


def test_window_exact_rationals():
    assert params.h1_star(5, 5, 3) == Fraction(4935, 2205)
    assert params.h1_star(4, 5, 2) == Fraction(9, 5)
    assert params.h1_star(4, 5, 1) == Fraction(2)
    w = params.field_window(5, 5, 3)
    i_n, _, l_n = params.layer_counts(5, 5, 3)
    assert w.h3 == Fraction(3) - Fraction(2 * i_n, l_n)
    total = sum(params.layer_counts(5, 5, k)[2] for k in range(3))
    assert w.h4 == Fraction(i_n, total)


def test_window_h4_undefined_at_n0():
    assert params.field_window(5, 5, 0).h4 is None


def test_h1_decreasing_to_h_limit():
    # |h1(N) - h_limit| shrinks like (lam-/lam+)^N, far below float64 by
    # N = 25, so the distances are compared in high precision
    with mp.workprec(400):
        h_lim = (5 - 2) - 4 * mp.sqrt(3) / (mp.sqrt(15) + 3 * mp.sqrt(3))
        prev = None
        prev_dist = None
        for n in range(1, 26):
            h1 = params.h1_star(5, 5, n)
            if prev is not None:
                assert h1 < prev
                dist = mp.mpf(h1.numerator) / h1.denominator - h_lim
                assert dist > 0
                if prev_dist is not None:
                    assert dist < prev_dist
                prev_dist = dist
            prev = h1


def test_h2_vs_h1_of_1_surfaced_not_reconciled():
    w = params.field_window(4, 5, 2)
    assert w.h2 == pytest.approx(1.8, abs=1e-9)
    assert w.h1_of_1 == Fraction(2)
    assert w.h2_equals_h1_of_1 is False


@pytest.mark.parametrize("p,q,h,expected", [
    (5, 5, Fraction(56, 25), 1),
    (5, 5, Fraction(5591, 2500), 1),
    (4, 5, Fraction(89, 50), 1),
])
def test_critical_radius_examples(p, q, h, expected):
    r = params.critical_radius(p, q, h)
    assert int(r) == expected
    assert not r.degenerate


def test_critical_radius_positive_below_h2():
    w = params.field_window(5, 5, 5)
    for h in (Fraction(2237, 1000), Fraction(2245, 1000), Fraction(2249, 1000)):
        assert float(h) < w.h2
        assert int(params.critical_radius(5, 5, h)) >= 1


def test_critical_radius_degenerate_boundary():
    # at h = 123/55 the floor argument is exactly 2 (the layer-2 ball
    # increment 615 - 275h vanishes): both candidates are reported
    r = params.critical_radius(5, 5, Fraction(123, 55))
    assert r.degenerate
    assert r.candidates == (1, 2)
    assert abs(r.ratio - 2) < 1e-12


def test_critical_radius_domain_errors():
    with pytest.raises(DomainError):
        params.critical_radius(5, 5, Fraction(3))       # h >= q-2
    with pytest.raises(DomainError):
        params.critical_radius(5, 5, Fraction(2))       # h <= h_limit ~ 2.2361
    with pytest.raises(DomainError):
        params.critical_radius(5, 5, Fraction(7, 2))


def test_critical_radius_agrees_with_floor_oracle():
    # independent evaluation of the floor expression in high precision
    with mp.workprec(200):
        for h in (Fraction(56, 25), Fraction(5591, 2500), Fraction(2243, 1000),
                  Fraction(2249, 1000)):
            q = 5
            lam_p, lam_m, a_p, a_m, _, _ = params._mp_constants(5, q, 200)
            hh = mp.mpf(h.numerator) / h.denominator
            x = mp.log((4 * mp.sqrt(q - 2) + a_m * (q - 2 - hh))
                       / (4 * mp.sqrt(q - 2) - a_p * (q - 2 - hh))) / mp.log(lam_p / lam_m)
            assert int(params.critical_radius(5, q, h)) == int(mp.floor(x))


def test_region_classification():
    assert params.region_classify(
        params.ModelParams(5, 5, 3, Fraction(56, 25), 1.0)).label == "METASTABLE"
    assert params.region_classify(
        params.ModelParams(5, 5, 3, Fraction(4), 1.0)).label == "II-b"
    h1 = params.h1_star(5, 5, 3)
    assert params.region_classify(
        params.ModelParams(5, 5, 3, h1, 1.0)).label == "DEGENERATE"
    assert params.region_classify(
        params.ModelParams(5, 5, 3, Fraction(1), 1.0)).label == "I-a"
    assert params.region_classify(
        params.ModelParams(5, 5, 3, Fraction(2237, 1000), 1.0)).label == "I-b"
    assert params.region_classify(
        params.ModelParams(5, 5, 3, Fraction(113, 50), 1.0)).label == "II-a"


def test_model_params_validation():
    with pytest.raises(DomainError):
        params.ModelParams(5, 5, -1, Fraction(1), 1.0)
    with pytest.raises(DomainError):
        params.ModelParams(5, 5, 1, Fraction(-1), 1.0)
    with pytest.raises(DomainError):
        params.ModelParams(5, 5, 1, 0.5, 1.0)  # floats are ambiguous, rejected
