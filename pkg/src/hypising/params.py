"""Closed-form model constants for the Ising model on hyperbolic {p,q} lattices.

The finite lattice is the ball of N+1 concentric layers around a central
face of the {p,q} tessellation (p-gons, vertex degree q, 1/p + 1/q < 1/2).
Layer populations split into I-vertices (one edge down to the previous
layer) and E-vertices (none), and evolve under an integer 2x2 transfer
matrix.  Everything in this module is a function of (p, q, N, h) alone:

* exact integer layer counts and their eigenvalue closed forms,
* the field thresholds h1*..h4* and the limiting threshold h_limit,
* the critical droplet radius r*(h),
* the classification of h into the dynamical regions.

Numeric policy: thresholds that are ratios of integers (h1*, h3*, h4*) are
exact `Fraction`s.  Quantities built from the transfer-matrix eigenvalues
(h2*, h_limit, r*) are evaluated with mpmath at >= 120 bits, re-evaluated
at double that precision, and the absolute difference is reported as
`err_bound`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath as mp

from .errors import DomainError

#: working precision (bits) for eigenvalue-dependent quantities
PRECISION_BITS = 120

#: |x - round(x)| below this makes a floor/threshold decision DEGENERATE
DEGENERACY_TOL = 1e-9


def as_fraction(h) -> Fraction:
    """Coerce int / Fraction / "num/den" string / (num, den) pair to Fraction."""
    if isinstance(h, Fraction):
        return h
    if isinstance(h, int):
        return Fraction(h)
    if isinstance(h, str):
        return Fraction(h.replace(" ", ""))
    if isinstance(h, tuple) and len(h) == 2:
        return Fraction(h[0], h[1])
    if isinstance(h, float):
        raise DomainError(
            f"field strength must be exact (Fraction, int, 'num/den', or (num, den)); "
            f"got float {h!r} -- pass Fraction({h}).limit_denominator(...) explicitly"
        )
    raise DomainError(f"cannot interpret {h!r} as an exact rational")


def check_pq(p: int, q: int) -> None:
    """Validate hyperbolicity 1/p + 1/q < 1/2 with p, q >= 4."""
    if not (isinstance(p, int) and isinstance(q, int)):
        raise DomainError(f"p, q must be integers, got {p!r}, {q!r}")
    if p < 4 or q < 4:
        raise DomainError(f"need p, q >= 4, got ({p}, {q})")
    if p * q - 2 * p - 2 * q <= 0:
        raise DomainError(f"({p}, {q}) is not hyperbolic: 1/{p} + 1/{q} >= 1/2")


def transfer_matrix(p: int, q: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Integer layer-recursion matrix acting on (I_n, E_n) column vectors."""
    check_pq(p, q)
    return ((q - 3, q - 2), (p * q - 3 * p - 3 * q + 8, p * q - 2 * p - 3 * q + 5))


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set: lattice shape, outer layer index, field, temperature."""

    p: int
    q: int
    N: int
    h: Fraction
    beta: float = 1.0

    def __post_init__(self):
        check_pq(self.p, self.q)
        object.__setattr__(self, "h", as_fraction(self.h))
        if self.N < 0:
            raise DomainError(f"N must be >= 0, got {self.N}")
        if self.h <= 0:
            raise DomainError(f"field strength h must be positive, got {self.h}")
        if self.beta < 0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")

    @property
    def h_float(self) -> float:
        return float(self.h)


@dataclass(frozen=True)
class SpectralConstants:
    """Transfer matrix, its eigen-pair, and the derived lattice constants.

    `err_bound` bounds the absolute error of each float field (difference
    between evaluations at PRECISION_BITS and 2x PRECISION_BITS).
    """

    p: int
    q: int
    T: tuple[tuple[int, int], tuple[int, int]]
    lambda_plus: float
    lambda_minus: float
    a_plus: float
    a_minus: float
    c_pq: float
    h_limit: float
    err_bound: float


def _mp_constants(p: int, q: int, prec: int):
    """mpmath evaluation of (lambda+, lambda-, a+, a-, c_pq, h_limit)."""
    with mp.workprec(prec):
        disc = mp.sqrt((p - 2) * (q - 2) * (q * (p - 2) - 2 * p))
        tr = mp.mpf(2 + p * (q - 2) - 2 * q)
        lam_p = (tr + disc) / 2
        lam_m = (tr - disc) / 2
        root = mp.sqrt((p - 2) * (p * (q - 2) - 2 * q))
        sq = mp.sqrt(q - 2)
        a_p = root - 2 * sq + p * sq
        a_m = root + 2 * sq - p * sq
        c = p / (2 * mp.sqrt((p - 2) * (p * q - 2 * p - 2 * q)))
        h_lim = (q - 2) - 4 * sq / a_p
        return lam_p, lam_m, a_p, a_m, c, h_lim


def spectral_constants(p: int, q: int) -> SpectralConstants:
    """Evaluate the transfer matrix and every eigenvalue-derived constant."""
    T = transfer_matrix(p, q)
    lo = _mp_constants(p, q, PRECISION_BITS)
    hi = _mp_constants(p, q, 2 * PRECISION_BITS)
    err = max(abs(float(a - b)) for a, b in zip(lo, hi))
    lam_p, lam_m, a_p, a_m, c, h_lim = (float(x) for x in hi)
    return SpectralConstants(p, q, T, lam_p, lam_m, a_p, a_m, c, h_lim, err)


def layer_counts(p: int, q: int, n: int) -> tuple[int, int, int]:
    """Exact (|I_n|, |E_n|, |L_n|) by n applications of the transfer matrix.

    Seed is (I_0, E_0) = (0, p).  Python integers, so no overflow at any n.
    """
    check_pq(p, q)
    if n < 0:
        raise DomainError(f"layer index must be >= 0, got {n}")
    T = transfer_matrix(p, q)
    i_n, e_n = 0, p
    for _ in range(n):
        i_n, e_n = T[0][0] * i_n + T[0][1] * e_n, T[1][0] * i_n + T[1][1] * e_n
    return i_n, e_n, i_n + e_n


def layer_sums(p: int, q: int, N: int) -> tuple[list[int], int]:
    """Per-layer sizes |L_0|..|L_N| and their total |Lambda|."""
    sizes = [layer_counts(p, q, k)[2] for k in range(N + 1)]
    return sizes, sum(sizes)


def i_count_closed_form(p: int, q: int, n: int) -> float:
    """|I_n| from the eigenvalue closed form 2 c sqrt(q-2) (lam+^n - lam-^n)."""
    with mp.workprec(PRECISION_BITS):
        lam_p, lam_m, _, _, c, _ = _mp_constants(p, q, PRECISION_BITS)
        return float(2 * c * mp.sqrt(q - 2) * (lam_p ** n - lam_m ** n))


def l_count_closed_form(p: int, q: int, n: int) -> float:
    """|L_n| from the eigenvalue closed form c (a- lam-^n + a+ lam+^n)."""
    with mp.workprec(PRECISION_BITS):
        lam_p, lam_m, a_p, a_m, c, _ = _mp_constants(p, q, PRECISION_BITS)
        return float(c * (a_m * lam_m ** n + a_p * lam_p ** n))


@dataclass(frozen=True)
class FieldWindow:
    """The four field thresholds at a given truncation N.

    h1, h3, h4 are exact rationals in the layer counts; h2 and h_limit are
    eigenvalue expressions carried as floats with `err_bound`.  `h1_of_1`
    is h1* evaluated at N = 1; `h2_equals_h1_of_1` records whether the two
    printed formulas agree (they do not for e.g. (4,5): 1.8 vs 2) -- the
    comparison is surfaced, not reconciled.
    """

    p: int
    q: int
    N: int
    h1: Fraction
    h2: float
    h3: Fraction
    h4: Optional[Fraction]
    h_limit: float
    h1_of_1: Fraction
    h2_equals_h1_of_1: bool
    err_bound: float


def _h2_mp(p: int, q: int, prec: int):
    with mp.workprec(prec):
        lam_p, lam_m, a_p, a_m, _, _ = _mp_constants(p, q, prec)
        return (q - 2) - 4 * mp.sqrt(q - 2) * (lam_p - lam_m) / (a_p * lam_p + a_m * lam_m)


def h2_star(p: int, q: int) -> float:
    """Upper edge of the metastable window (eigenvalue expression)."""
    return float(_h2_mp(p, q, 2 * PRECISION_BITS))


def h1_star(p: int, q: int, N: int) -> Fraction:
    """Lower window edge ((q-2)|L_N| - |I_N|) / sum_{j<=N} |L_j|, exact."""
    i_n, _, l_n = layer_counts(p, q, N)
    _, tot = layer_sums(p, q, N)
    return Fraction((q - 2) * l_n - i_n, tot)


def field_window(p: int, q: int, N: int) -> FieldWindow:
    """All four thresholds h1*..h4* plus h_limit at truncation N."""
    check_pq(p, q)
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    i_n, _, l_n = layer_counts(p, q, N)
    sizes, tot = layer_sums(p, q, N)
    h1 = Fraction((q - 2) * l_n - i_n, tot)
    h3 = Fraction(q - 2) - Fraction(2 * i_n, l_n)
    h4 = Fraction(i_n, tot - l_n) if N >= 1 else None
    h2_lo = float(_h2_mp(p, q, PRECISION_BITS))
    h2_hi = float(_h2_mp(p, q, 2 * PRECISION_BITS))
    sc = spectral_constants(p, q)
    h1_1 = h1_star(p, q, 1)
    agree = abs(h2_hi - float(h1_1)) <= max(1e-12, 2 * abs(h2_hi - h2_lo))
    return FieldWindow(
        p=p, q=q, N=N, h1=h1, h2=h2_hi, h3=h3, h4=h4,
        h_limit=sc.h_limit, h1_of_1=h1_1, h2_equals_h1_of_1=agree,
        err_bound=max(abs(h2_hi - h2_lo), sc.err_bound),
    )


@dataclass(frozen=True)
class CriticalRadius:
    """Floor of the droplet-radius expression, with boundary diagnostics.

    When the un-floored ratio sits within DEGENERACY_TOL of an integer the
    result is flagged degenerate and both candidate radii are reported
    instead of silently picking one.
    """

    value: int
    ratio: float
    degenerate: bool
    candidates: tuple[int, ...]
    err_bound: float

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value


def critical_radius(p: int, q: int, h) -> CriticalRadius:
    """Radius at which growing a plus ball turns energetically downhill.

    r* = floor( log[(4 sqrt(q-2) + a-(q-2-h)) / (4 sqrt(q-2) - a+(q-2-h))]
                / log(lambda+/lambda-) )

    Valid for h strictly between h_limit and q-2; outside that range the
    logarithm arguments change sign and a DomainError explains which.
    """
    check_pq(p, q)
    hf = as_fraction(h)

    def _ratio(prec: int):
        with mp.workprec(prec):
            lam_p, lam_m, a_p, a_m, _, h_lim = _mp_constants(p, q, prec)
            hh = mp.mpf(hf.numerator) / hf.denominator
            gap = (q - 2) - hh
            num = 4 * mp.sqrt(q - 2) + a_m * gap
            den = 4 * mp.sqrt(q - 2) - a_p * gap
            return num, den, mp.log(num / den) / mp.log(lam_p / lam_m) if den > 0 and num > 0 else None

    if hf >= q - 2:
        raise DomainError(
            f"h = {hf} >= q-2 = {q - 2}: ball growth is downhill from the start, "
            "the critical-radius expression has no positive logarithm"
        )
    num, den, x_lo = _ratio(PRECISION_BITS)
    if den <= 0:
        sc = spectral_constants(p, q)
        raise DomainError(
            f"h = {float(hf):.6g} <= h_limit = {sc.h_limit:.6g}: "
            "denominator 4 sqrt(q-2) - a+(q-2-h) is not positive"
        )
    _, _, x_hi = _ratio(2 * PRECISION_BITS)
    x = float(x_hi)
    err = abs(float(x_hi - x_lo))
    frac_dist = abs(x - round(x))
    if frac_dist < DEGENERACY_TOL:
        k = round(x)
        return CriticalRadius(int(k), x, True, (int(k) - 1, int(k)), err)
    value = int(mp.floor(x_hi))
    return CriticalRadius(value, x, False, (value,), err)


#: region labels, in increasing h
REGION_IA = "I-a"
REGION_IB = "I-b"
REGION_METASTABLE = "METASTABLE"
REGION_IIA = "II-a"
REGION_IIB = "II-b"
REGION_DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class Region:
    """Classification of (p, q, N, h) into the dynamical regimes."""

    label: str
    sublabel: Optional[str] = None
    note: str = ""


def region_classify(params: ModelParams) -> Region:
    """Place h relative to (h_limit, h1*, h2*, h3*, q-2).

    Exact rational boundaries (h = h1*, h = q-2) and near-coincidence with
    the irrational ones (h_limit, h2*, within DEGENERACY_TOL) are labelled
    DEGENERATE.  The I-b band is sub-split at h3* per the region analysis
    of the boundary-driven regimes.
    """
    w = field_window(params.p, params.q, params.N)
    h = params.h
    hf = float(h)
    if h == w.h1:
        return Region(REGION_DEGENERATE, note="h equals h1*: two global minima, no metastability")
    if h == params.q - 2:
        return Region(REGION_DEGENERATE, note="h equals q-2: single-flip growth cost degenerate")
    if abs(hf - w.h_limit) < DEGENERACY_TOL:
        return Region(REGION_DEGENERATE, note="h within tolerance of h_limit")
    if abs(hf - w.h2) < DEGENERACY_TOL:
        return Region(REGION_DEGENERATE, note="h within tolerance of h2*")
    if hf < w.h_limit:
        return Region(REGION_IA, note="every plus cluster shrinks toward all-minus")
    if h < w.h1:
        if h == w.h3:
            sub = "at-h3"
        elif h < w.h3:
            sub = "below-h3"
        else:
            sub = "above-h3"
        return Region(REGION_IB, sublabel=sub,
                      note="all-minus stable; heterogeneous shrinking from the boundary")
    if hf < w.h2:
        return Region(REGION_METASTABLE,
                      note="all-minus metastable, all-plus stable, nucleation via critical droplet")
    if hf < params.q - 2:
        return Region(REGION_IIA, note="ball growth downhill at every radius")
    return Region(REGION_IIB, note="h > q-2: any single flip toward plus is downhill")
