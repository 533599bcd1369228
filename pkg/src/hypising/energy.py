"""Spin configurations and exact relative energies.

All energies are differences against the all-minus reference state and are
carried as an integer pair (u, n): u counts disagreeing edges, one unit per
edge (frozen-boundary disagreements included via the layer-N exposures),
and n counts plus spins.  The energy difference at field h is u - h*n, and
comparisons under rational h = a/b reduce to exact integer comparisons of
u*b - n*a, so the landscape analysis is tie-exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import DomainError
from .lattice import LatticeGraph
from .params import as_fraction


@dataclass(frozen=True)
class ExactEnergy:
    """Integer pair (u, n) representing the energy difference u - h*n.

    Also used for single-flip deltas, where u and n may be negative.
    """

    u: int
    n: int

    def value(self, h) -> Union[Fraction, float]:
        if isinstance(h, float):
            return self.u - h * self.n
        return self.u - as_fraction(h) * self.n

    def key(self, h) -> int:
        """Exact comparison key u*den - n*num; equal keys iff equal values at h."""
        hf = as_fraction(h)
        return self.u * hf.denominator - self.n * hf.numerator

    def __add__(self, other: "ExactEnergy") -> "ExactEnergy":
        return ExactEnergy(self.u + other.u, self.n + other.n)

    def __sub__(self, other: "ExactEnergy") -> "ExactEnergy":
        return ExactEnergy(self.u - other.u, self.n - other.n)

    def __neg__(self) -> "ExactEnergy":
        return ExactEnergy(-self.u, -self.n)

    def as_dict(self) -> dict:
        return {"u": self.u, "n": self.n}

    def as_tuple(self) -> tuple[int, int]:
        return (self.u, self.n)


ZERO = ExactEnergy(0, 0)


def exact_max(items: Iterable[ExactEnergy], h) -> ExactEnergy:
    hf = as_fraction(h)
    return max(items, key=lambda e: e.key(hf))


class SpinConfig:
    """Assignment of -1/+1 to the lattice, stored as a uint8 array (1 = plus).

    Tracks the plus count; owned by one writer at a time (the lattice graph
    itself is shared read-only).
    """

    __slots__ = ("spins", "plus_count")

    def __init__(self, spins: np.ndarray, plus_count: int | None = None):
        self.spins = np.ascontiguousarray(spins, dtype=np.uint8)
        self.plus_count = int(self.spins.sum()) if plus_count is None else int(plus_count)

    @classmethod
    def all_minus(cls, g: LatticeGraph) -> "SpinConfig":
        return cls(np.zeros(g.n_vertices, dtype=np.uint8), 0)

    @classmethod
    def all_plus(cls, g: LatticeGraph) -> "SpinConfig":
        return cls(np.ones(g.n_vertices, dtype=np.uint8), g.n_vertices)

    @classmethod
    def from_plus_ids(cls, g: LatticeGraph, ids) -> "SpinConfig":
        s = np.zeros(g.n_vertices, dtype=np.uint8)
        s[np.asarray(list(ids), dtype=np.int64)] = 1
        return cls(s)

    @classmethod
    def from_state_int(cls, g: LatticeGraph, state: int) -> "SpinConfig":
        """Bit i of state = spin of canonical vertex i."""
        bits = (state >> np.arange(g.n_vertices, dtype=np.uint64)) & 1
        return cls(bits.astype(np.uint8))

    def to_state_int(self) -> int:
        return int(sum(1 << i for i in np.nonzero(self.spins)[0]))

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.spins.copy(), self.plus_count)

    def flip(self, vid: int) -> None:
        s = self.spins[vid]
        self.spins[vid] = 1 - s
        self.plus_count += 1 if s == 0 else -1

    def __len__(self) -> int:
        return self.spins.size

    def __eq__(self, other) -> bool:
        return isinstance(other, SpinConfig) and np.array_equal(self.spins, other.spins)


def _check_size(g: LatticeGraph, s: SpinConfig) -> None:
    if len(s) != g.n_vertices:
        raise DomainError(f"configuration has {len(s)} spins, lattice has {g.n_vertices}")


def delta_h(g: LatticeGraph, s: SpinConfig) -> ExactEnergy:
    """Energy relative to all-minus: disagreeing edges + plus exposures, plus count."""
    _check_size(g, s)
    a, b = g.edges()
    u = int(np.count_nonzero(s.spins[a] != s.spins[b]))
    u += int(g.exposure[s.spins == 1].sum())
    return ExactEnergy(u, s.plus_count)


def flip_delta(g: LatticeGraph, s: SpinConfig, v) -> ExactEnergy:
    """Exact (du, dn) for flipping v: du = q_eff - 2k, dn = +-1.

    q_eff = internal degree + exposure; k counts neighbors (frozen minuses
    included) whose spin equals the post-flip value of v.  Matches the global
    difference delta_h(after) - delta_h(before) exactly.
    """
    vid = g.vertex_id(*v) if isinstance(v, tuple) else int(v)
    if not (0 <= vid < g.n_vertices):
        raise DomainError(f"unknown vertex {v!r}")
    _check_size(g, s)
    nbr, cnt = g.neighbor_table()
    deg = int(cnt[vid])
    e = int(g.exposure[vid])
    post = 1 - int(s.spins[vid])
    k = int(np.count_nonzero(s.spins[nbr[vid, :deg]] == post))
    if post == 0:
        k += e
    return ExactEnergy(deg + e - 2 * k, 1 if post else -1)


@dataclass(frozen=True)
class Cluster:
    vertices: np.ndarray
    area: int
    perimeter: int


@dataclass(frozen=True)
class ClusterSummary:
    clusters: list[Cluster]

    @property
    def total_area(self) -> int:
        return sum(c.area for c in self.clusters)

    @property
    def total_perimeter(self) -> int:
        return sum(c.perimeter for c in self.clusters)


def clusters(g: LatticeGraph, s: SpinConfig) -> ClusterSummary:
    """Connected plus components with exact areas and contour perimeters.

    A cluster's perimeter counts its edges to internal minus vertices plus
    the exposures of its layer-N members; distinct maximal clusters share no
    edge, so perimeters sum to the u of the whole configuration.
    """
    _check_size(g, s)
    nbr, cnt = g.neighbor_table()
    spins = s.spins
    seen = np.zeros(g.n_vertices, dtype=bool)
    out: list[Cluster] = []
    for start in np.nonzero(spins)[0]:
        if seen[start]:
            continue
        stack = [int(start)]
        seen[start] = True
        members = []
        perim = 0
        while stack:
            v = stack.pop()
            members.append(v)
            perim += int(g.exposure[v])
            for j in range(cnt[v]):
                w = int(nbr[v, j])
                if spins[w]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
                else:
                    perim += 1
        members_arr = np.array(sorted(members), dtype=np.int64)
        out.append(Cluster(members_arr, len(members), perim))
    return ClusterSummary(out)


def perimeter_of_set(g: LatticeGraph, ids) -> int:
    """Contour length of an arbitrary plus set (q*|S| - 2*internal edges)."""
    s = SpinConfig.from_plus_ids(g, ids)
    return delta_h(g, s).u
