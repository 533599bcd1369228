"""Layered combinatorial construction of the finite hyperbolic patch.

A lattice is built outward from a central p-gon: layer 0 is a p-cycle, and
layer k+1 is emitted by walking layer k in index order.  Every vertex emits
its up-edges in order (an I-vertex of the new layer per up-edge); between
two consecutive up-edges of the same vertex sit p-3 E-vertices (a "sole"
face), and between the last up-edge of a vertex and the first up-edge of
its cyclic successor sit p-4 E-vertices (a "shared" face).  I-vertices have
q-3 up-edges, E-vertices q-2, so interior degrees all equal q and the
per-layer (I, E) counts reproduce the transfer-matrix recursion.

Canonical orientation: index 0 of layer k+1 is the first up-neighbor of
index 0 of layer k, which makes every derived path and droplet reproducible
byte-for-byte.

Adjacency is arithmetic -- intra-layer cycles by index, one parent link per
I-vertex, and up-neighbors at stride p-2 from a per-vertex first-child
offset -- so memory stays O(|Lambda|) with no edge list.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError
from .params import check_pq, layer_counts, layer_sums

DEFAULT_VERTEX_CAP = 10 ** 7


@dataclass
class LatticeGraph:
    """Immutable-after-build layered lattice with arithmetic adjacency.

    Vertices are identified globally (layer_start[k] + index) or as
    (layer, index) pairs; `cls` is 1 for I-vertices, 0 for E.  `parent` and
    `first_child` hold global ids (-1 where absent).  `exposure` counts
    frozen minus neighbors outside the patch (nonzero only in layer N).
    """

    p: int
    q: int
    N: int
    layer_sizes: list[int]
    layer_start: np.ndarray          # int64, length N+2
    cls: np.ndarray                  # int8
    parent: np.ndarray               # int64, global id or -1
    first_child: np.ndarray          # int64, global id or -1
    exposure: np.ndarray             # int16
    _nbr: Optional[np.ndarray] = field(default=None, repr=False)
    _nbr_count: Optional[np.ndarray] = field(default=None, repr=False)
    _edges: Optional[tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return int(self.layer_start[-1])

    def vertex_id(self, layer: int, index: int) -> int:
        if not (0 <= layer <= self.N):
            raise DomainError(f"layer {layer} outside 0..{self.N}")
        size = self.layer_sizes[layer]
        if not (0 <= index < size):
            raise DomainError(f"index {index} outside layer {layer} of size {size}")
        return int(self.layer_start[layer]) + index

    def vertex_of(self, vid: int) -> tuple[int, int]:
        if not (0 <= vid < self.n_vertices):
            raise DomainError(f"vertex id {vid} outside 0..{self.n_vertices - 1}")
        layer = int(np.searchsorted(self.layer_start, vid, side="right")) - 1
        return layer, vid - int(self.layer_start[layer])

    def layer_slice(self, k: int) -> slice:
        return slice(int(self.layer_start[k]), int(self.layer_start[k + 1]))

    def children_count(self, vid: int) -> int:
        layer, _ = self.vertex_of(vid)
        if layer == self.N:
            return 0
        return self.q - 3 if self.cls[vid] else self.q - 2

    def neighbor_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(nbr, nbr_count): padded int32 neighbor matrix + per-vertex degree."""
        if self._nbr is None:
            self._nbr, self._nbr_count = _build_neighbor_table(
                self.p, self.q, self.N, self.layer_sizes,
                self.layer_start, self.cls, self.parent, self.first_child)
        return self._nbr, self._nbr_count

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """All internal edges once, as (a, b) int64 arrays (intra + parent)."""
        if self._edges is None:
            heads, tails = [], []
            for k in range(self.N + 1):
                s = int(self.layer_start[k])
                size = self.layer_sizes[k]
                idx = np.arange(size, dtype=np.int64)
                heads.append(s + idx)
                tails.append(s + (idx + 1) % size)
            has_parent = self.parent >= 0
            heads.append(np.nonzero(has_parent)[0].astype(np.int64))
            tails.append(self.parent[has_parent])
            self._edges = (np.concatenate(heads), np.concatenate(tails))
        return self._edges


def build(p: int, q: int, N: int, cap: int = DEFAULT_VERTEX_CAP) -> LatticeGraph:
    """Construct the N+1-layer patch; refuses when |Lambda| would exceed cap."""
    check_pq(p, q)
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    sizes, total = layer_sums(p, q, N)
    if total > cap:
        raise CapacityError(
            f"lattice ({p},{q}) with N={N} has {total} vertices, over the cap {cap}; "
            "layer sizes grow like lambda_plus^N -- raise cap explicitly if intended"
        )
    layer_start = np.zeros(N + 2, dtype=np.int64)
    np.cumsum(sizes, out=layer_start[1:])

    cls = np.zeros(total, dtype=np.int8)
    parent = np.full(total, -1, dtype=np.int64)
    first_child = np.full(total, -1, dtype=np.int64)

    for k in range(N):
        sl = slice(int(layer_start[k]), int(layer_start[k + 1]))
        ck = cls[sl]
        c = np.where(ck == 1, q - 3, q - 2).astype(np.int64)
        block = c * (p - 2) - 1                       # children + E-fill per parent
        starts = np.zeros(len(c), dtype=np.int64)
        np.cumsum(block[:-1], out=starts[1:])
        # I positions: starts[v] + j*(p-2) for j < c[v]
        reps = np.repeat(starts, c)
        j = np.arange(c.sum(), dtype=np.int64) - np.repeat(np.cumsum(c) - c, c)
        i_pos = reps + j * (p - 2) + int(layer_start[k + 1])
        cls[i_pos] = 1
        parent[i_pos] = np.repeat(np.arange(sl.start, sl.stop, dtype=np.int64), c)
        first_child[sl] = starts + int(layer_start[k + 1])

    exposure = np.zeros(total, dtype=np.int16)
    lastsl = slice(int(layer_start[N]), int(layer_start[N + 1]))
    exposure[lastsl] = np.where(cls[lastsl] == 1, q - 3, q - 2)

    return LatticeGraph(p, q, N, list(sizes), layer_start, cls, parent, first_child, exposure)


def _build_neighbor_table(p, q, N, sizes, layer_start, cls, parent, first_child):
    total = int(layer_start[-1])
    nbr = np.full((total, q), -1, dtype=np.int32)
    count = np.zeros(total, dtype=np.int32)
    for k in range(N + 1):
        s = int(layer_start[k])
        size = sizes[k]
        idx = np.arange(size, dtype=np.int64)
        g = s + idx
        nbr[g, 0] = s + (idx - 1) % size
        nbr[g, 1] = s + (idx + 1) % size
        count[g] = 2
    has_parent = np.nonzero(parent >= 0)[0]
    nbr[has_parent, 2] = parent[has_parent]
    count[has_parent] = 3
    for k in range(N):
        sl = slice(int(layer_start[k]), int(layer_start[k + 1]))
        g = np.arange(sl.start, sl.stop, dtype=np.int64)
        c = np.where(cls[sl] == 1, q - 3, q - 2).astype(np.int64)
        for j in range(int(c.max())):
            m = c > j
            rows = g[m]
            nbr[rows, count[rows]] = first_child[rows] + j * (p - 2)
            count[rows] += 1
    return nbr, count


def boundary_exposure(g: LatticeGraph, v) -> int:
    """Frozen-minus neighbor count of v: 0 interior, q-3 / q-2 in layer N."""
    vid = g.vertex_id(*v) if isinstance(v, tuple) else int(v)
    if not (0 <= vid < g.n_vertices):
        raise DomainError(f"unknown vertex {v!r}")
    return int(g.exposure[vid])


@dataclass
class ValidationReport:
    ok: bool
    failures: list[str]
    checked: dict

    def __bool__(self) -> bool:
        return self.ok


def validate(g: LatticeGraph, max_failures: int = 20) -> ValidationReport:
    """Audit every structural invariant; names the first counterexamples.

    Checks per-layer (I, E) counts against the recursion, parent links,
    degree q for interior vertices, exposures, I-I spacing in {p-3, p-4},
    and the sole/shared face bookkeeping identity
    E_{k+1} = (p-3)[(q-4)I_k + (q-3)E_k] + (p-4)L_k.
    """
    p, q, N = g.p, g.q, g.N
    fails: list[str] = []
    checked = {"layers": N + 1, "vertices": g.n_vertices}

    def fail(msg):
        if len(fails) < max_failures:
            fails.append(msg)

    for k in range(N + 1):
        sl = g.layer_slice(k)
        i_cnt = int(np.count_nonzero(g.cls[sl]))
        e_cnt = g.layer_sizes[k] - i_cnt
        ri, re_, rl = layer_counts(p, q, k)
        if (i_cnt, e_cnt) != (ri, re_) or g.layer_sizes[k] != rl:
            fail(f"layer {k}: counts (I,E)=({i_cnt},{e_cnt}) != recursion ({ri},{re_})")

    if np.count_nonzero(g.cls[g.layer_slice(0)]):
        fail("layer 0: contains I-class vertices")
    if np.any(g.parent[g.layer_slice(0)] >= 0):
        fail("layer 0: has parent links")

    for k in range(1, N + 1):
        sl = g.layer_slice(k)
        is_i = g.cls[sl] == 1
        par = g.parent[sl]
        bad = np.nonzero(is_i != (par >= 0))[0]
        if bad.size:
            fail(f"layer {k} index {bad[0]}: I-class iff parent mismatch")
        lo, hi = int(g.layer_start[k - 1]), int(g.layer_start[k])
        outside = np.nonzero((par >= 0) & ((par < lo) | (par >= hi)))[0]
        if outside.size:
            fail(f"layer {k} index {outside[0]}: parent not in layer {k - 1}")

    # degrees: 2 intra + parent + children emitted, audited from the parent array
    for k in range(N):
        sl = g.layer_slice(k)
        nxt = g.layer_slice(k + 1)
        kids = np.bincount(
            (g.parent[nxt][g.parent[nxt] >= 0] - sl.start).astype(np.int64),
            minlength=g.layer_sizes[k])
        expect = np.where(g.cls[sl] == 1, q - 3, q - 2)
        bad = np.nonzero(kids != expect)[0]
        if bad.size:
            fail(f"layer {k} index {bad[0]}: emits {kids[bad[0]]} up-edges, expected {expect[bad[0]]}")
        deg = 2 + (g.parent[sl] >= 0).astype(np.int64) + kids
        badd = np.nonzero(deg != q)[0]
        if badd.size:
            fail(f"layer {k} index {badd[0]}: interior degree {deg[badd[0]]} != q")

    lastsl = g.layer_slice(N)
    expect_expo = np.where(g.cls[lastsl] == 1, q - 3, q - 2)
    bad = np.nonzero(g.exposure[lastsl] != expect_expo)[0]
    if bad.size:
        fail(f"layer {N} index {bad[0]}: exposure {g.exposure[lastsl][bad[0]]} != {expect_expo[bad[0]]}")
    if np.any(g.exposure[: int(g.layer_start[N])] != 0):
        fail("interior vertex with nonzero exposure")

    # I-I spacing and face bookkeeping
    for k in range(1, N + 1):
        sl = g.layer_slice(k)
        ipos = np.nonzero(g.cls[sl] == 1)[0]
        if ipos.size >= 2:
            gaps = np.diff(np.append(ipos, ipos[0] + g.layer_sizes[k])) - 1
            badg = np.nonzero((gaps != p - 3) & (gaps != p - 4))[0]
            if badg.size:
                fail(f"layer {k}: E-run of length {gaps[badg[0]]} after I index {ipos[badg[0]]}")
        i_prev, e_prev, l_prev = layer_counts(p, q, k - 1)
        soles = (q - 4) * i_prev + (q - 3) * e_prev
        e_here = g.layer_sizes[k] - int(np.count_nonzero(g.cls[sl]))
        if e_here != (p - 3) * soles + (p - 4) * l_prev:
            fail(f"layer {k}: E-count {e_here} != (p-3)*soles + (p-4)*shared")

    checked["failures"] = len(fails)
    return ValidationReport(not fails, fails, checked)


# ---------------------------------------------------------------------------
# streaming class-sequence audit (for lattices too large to materialize)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _emit_layer(cls_k, q, p, out):
    """Walk layer k vertex by vertex, writing layer k+1 classes into out.

    Returns (I_count, E_count, soles, shared) actually emitted.
    """
    pos = 0
    i_cnt = 0
    e_cnt = 0
    soles = 0
    shared = 0
    for v in range(cls_k.size):
        c = q - 3 if cls_k[v] == 1 else q - 2
        for j in range(c):
            out[pos] = 1
            pos += 1
            i_cnt += 1
            if j < c - 1:
                for _ in range(p - 3):
                    out[pos] = 0
                    pos += 1
                e_cnt += p - 3
                soles += 1
        for _ in range(p - 4):
            out[pos] = 0
            pos += 1
        e_cnt += p - 4
        shared += 1
    return i_cnt, e_cnt, soles, shared


@njit(cache=True)
def _count_layer(cls_k, q, p):
    """Per-parent emission arithmetic without materializing the next layer."""
    i_cnt = 0
    e_cnt = 0
    soles = 0
    shared = 0
    for v in range(cls_k.size):
        c = q - 3 if cls_k[v] == 1 else q - 2
        i_cnt += c
        e_cnt += (c - 1) * (p - 3) + (p - 4)
        soles += c - 1
        shared += 1
    return i_cnt, e_cnt, soles, shared


def streaming_count_audit(p: int, q: int, N: int,
                          materialize_cap: int = 10 ** 8) -> ValidationReport:
    """Verify layer counts and the face identity without building adjacency.

    Classes of layers 0..N-1 are emitted per vertex (layers up to
    materialize_cap entries are materialized; the final layer is counted
    per parent).  Each layer's emitted (I, E) is compared with the
    transfer recursion and with the sole/shared identity.
    """
    check_pq(p, q)
    fails: list[str] = []
    cur = np.zeros(p, dtype=np.int8)
    for k in range(N + 1):
        i_cnt = int(np.count_nonzero(cur))
        e_cnt = cur.size - i_cnt
        ri, re_, _ = layer_counts(p, q, k)
        if (i_cnt, e_cnt) != (ri, re_):
            fails.append(f"layer {k}: emitted (I,E)=({i_cnt},{e_cnt}) != recursion ({ri},{re_})")
            break
        if k == N:
            break
        _, _, l_next = layer_counts(p, q, k + 1)
        ip, ep, lp = i_cnt, e_cnt, cur.size
        if k == N - 1 or l_next > materialize_cap:
            ni, ne, soles, shared = _count_layer(cur, q, p)
            nxt = None
        else:
            nxt = np.empty(l_next, dtype=np.int8)
            ni, ne, soles, shared = _emit_layer(cur, q, p, nxt)
        if soles != (q - 4) * ip + (q - 3) * ep or shared != lp:
            fails.append(f"layer {k + 1}: sole/shared counts ({soles},{shared}) off")
        if ne != (p - 3) * soles + (p - 4) * shared:
            fails.append(f"layer {k + 1}: E-identity violated ({ne})")
        ri, re_, _ = layer_counts(p, q, k + 1)
        if (ni, ne) != (ri, re_):
            fails.append(f"layer {k + 1}: emitted (I,E)=({ni},{ne}) != recursion ({ri},{re_})")
        if nxt is None:
            break
        cur = nxt
    return ValidationReport(not fails, fails, {"p": p, "q": q, "N": N})


def class_pattern(p: int, q: int, k: int, cap: int = 10 ** 7) -> np.ndarray:
    """Class sequence (1 = I) of layer k, generated without a full build."""
    _, _, l_k = layer_counts(p, q, k)
    if l_k > cap:
        raise CapacityError(f"layer {k} of ({p},{q}) has {l_k} vertices, over cap {cap}")
    cur = np.zeros(p, dtype=np.int8)
    for j in range(k):
        _, _, l_next = layer_counts(p, q, j + 1)
        nxt = np.empty(l_next, dtype=np.int8)
        _emit_layer(cur, q, p, nxt)
        cur = nxt
    return cur


# ---------------------------------------------------------------------------
# Poincare-disk embedding (best effort, plotting support only)
# ---------------------------------------------------------------------------

def _mobius_step(z: complex, theta: float, t: float) -> complex:
    """Move hyperbolic distance with tanh(d/2)=t from z along direction theta."""
    w = t * np.exp(1j * theta)
    return (w + z) / (1 + np.conj(z) * w)


def _direction(z_from: complex, z_to: complex) -> float:
    """Angle at z_from of the geodesic toward z_to (tangent-space direction)."""
    return float(np.angle((z_to - z_from) / (1 - np.conj(z_from) * z_to)))


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    d = abs((z1 - z2) / (1 - np.conj(z1) * z2))
    return float(2 * np.arctanh(d))


def embed_poincare(g: LatticeGraph, max_n: int = 8):
    """Unit-disk coordinates for every vertex, all edges of one hyperbolic length.

    Layer 0 is a regular p-gon at the face circumradius R with
    cosh R = cot(pi/p) cot(pi/q); each later layer is walked in index order,
    turning one pinwheel slot (2 pi / q) per vertex, anchored at the first
    child of each layer's index 0.  Returns a list of rows
    (layer, index, class, x, y).
    """
    if g.N > max_n:
        raise DomainError(f"embedding supported for N <= {max_n} (plot scale), got N={g.N}")
    p, q, N = g.p, g.q, g.N
    R = float(np.arccosh(1.0 / (np.tan(np.pi / p) * np.tan(np.pi / q))))
    ell = float(2 * np.arccosh(np.cos(np.pi / p) / np.sin(np.pi / q)))
    tR = np.tanh(R / 2)
    tl = np.tanh(ell / 2)
    slot = 2 * np.pi / q

    z = np.zeros(g.n_vertices, dtype=complex)
    # layer 0: index increases clockwise
    for i in range(p):
        z[i] = tR * np.exp(1j * (np.pi / 2 - 2 * np.pi * i / p))

    for k in range(N):
        sl = g.layer_slice(k + 1)
        size = g.layer_sizes[k + 1]
        # anchor: index 0 of layer k+1 is the first child of index 0 of layer k
        v0 = int(g.layer_start[k])
        w0 = int(g.first_child[v0])
        prev_of_v0 = v0 + (g.layer_sizes[k] - 1)
        th_left = _direction(z[v0], z[prev_of_v0])
        z[w0] = _mobius_step(z[v0], th_left - slot, tl)
        # walk the cycle; pinwheel at each vertex, clockwise from the edge to its
        # intra predecessor: [(i-1), up-slots..., (i+1), parent?], so
        # dir(w -> i+1) = dir(w -> i-1) - (1 + up_slots) * slot.  The anchor's
        # predecessor direction comes from its parent slot, one step further.
        th_prev = _direction(z[w0], z[v0]) - slot
        cur = w0
        for t in range(1, size):
            c = q - 3 if g.cls[cur] else q - 2    # geometric up-slots, any layer
            th_next = th_prev - (1 + c) * slot
            nxt = sl.start + t
            z[nxt] = _mobius_step(z[cur], th_next, tl)
            th_prev = _direction(z[nxt], z[cur])
            cur = nxt

    rows = []
    for vid in range(g.n_vertices):
        layer, index = g.vertex_of(vid)
        rows.append((layer, index, "I" if g.cls[vid] else "E",
                     float(z[vid].real), float(z[vid].imag)))
    return rows, z, ell
