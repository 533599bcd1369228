"""Seeded Metropolis single-flip dynamics and exact chain analysis.

The chain is the discrete-time Metropolis dynamics itself: one step is one
uniform vertex proposal accepted with probability exp(-beta [dH]_+), no
continuous-time embedding.  Energy deltas inside the simulation kernel use
the same integer bookkeeping as the exact layer (du = q_eff - 2k), with the
field folded in as a float only for the acceptance test.

Randomness: xoshiro256++ runs inside the kernel; replica i of a campaign
with master seed m is seeded by four SplitMix64 outputs started from
m + i * 0x9E3779B97F4A7C15 (all mod 2^64).  Both algorithms are fixed and
named, so identical (params, seed) reproduce trajectories bit-for-bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numba import njit

from .energy import ExactEnergy, SpinConfig, delta_h, flip_delta
from .errors import CapacityError, DomainError, InsufficientSamplesError
from .landscape import state_energies
from .lattice import LatticeGraph
from .params import ModelParams

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

TARGET_NONE = 0
TARGET_ALL_PLUS = 1
TARGET_ALL_MINUS = 2
TARGET_EITHER = 3
TARGET_INTERIOR_PLUS = 4

_TARGET_CODES = {
    "none": TARGET_NONE,
    "all_plus": TARGET_ALL_PLUS,
    "all_minus": TARGET_ALL_MINUS,
    "either": TARGET_EITHER,
    # extension beyond the core target set: every vertex of layers 0..N-1
    # plus, regardless of the (entropically soft) outermost layer.  This is
    # the nucleation observable that stays measurable at simulable beta.
    "interior_plus": TARGET_INTERIOR_PLUS,
}


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def derive_stream(master_seed: int, stream: int) -> np.ndarray:
    """xoshiro256++ state for a replica stream: SplitMix64 of m + i*GOLDEN."""
    state = (int(master_seed) + int(stream) * _GOLDEN) & _MASK64
    out = np.empty(4, dtype=np.uint64)
    for j in range(4):
        state, z = _splitmix64(state)
        out[j] = z
    if not out.any():
        out[0] = 1
    return out


@njit(cache=True, inline="always")
def _rotl(x, k):
    return np.uint64((x << np.uint64(k)) | (x >> np.uint64(64 - k)))


@njit(cache=True, inline="always")
def _xo_next(s):
    result = np.uint64(_rotl(s[0] + s[3], 23) + s[0])
    t = np.uint64(s[1] << np.uint64(17))
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def _run_chain(nbr, cnt, expo, spins, u0, n0, h_float, beta, rng, max_steps,
               target, edges_a, edges_b, audit_every, interior_size):
    """Advance the chain until the target set is entered or max_steps pass.

    Returns (steps, hit, u, n_plus, audit_fail).  The rng state array is
    mutated in place; `spins` is mutated to the final configuration.
    """
    n_v = spins.size
    mask = np.uint64(1)
    while mask < np.uint64(n_v):
        mask = np.uint64((mask << np.uint64(1)) | np.uint64(1))
    u = u0
    n_plus = n0
    n_int = np.int64(0)
    for vv in range(interior_size):
        if spins[vv] == 1:
            n_int += 1
    steps = np.int64(0)
    audit_fail = False
    inv53 = 1.0 / 9007199254740992.0
    while steps < max_steps:
        # uniform vertex via masked rejection (exactly uniform)
        while True:
            v = np.int64(_xo_next(rng) & mask)
            if v < n_v:
                break
        steps += 1
        sv = spins[v]
        post = np.uint8(1 - sv)
        deg = cnt[v]
        e = expo[v]
        k = np.int64(0)
        for j in range(deg):
            if spins[nbr[v, j]] == post:
                k += 1
        if post == 0:
            k += e
        du = np.int64(deg) + np.int64(e) - 2 * k
        dn = np.int64(1) if post == 1 else np.int64(-1)
        d = du - h_float * dn
        accept = True
        if d > 0.0:
            r = np.float64(_xo_next(rng) >> np.uint64(11)) * inv53
            accept = r < math.exp(-beta * d)
        if accept:
            spins[v] = post
            u += du
            n_plus += dn
            if v < interior_size:
                n_int += dn
        if audit_every > 0 and steps % audit_every == 0:
            uu = np.int64(0)
            for ei in range(edges_a.size):
                if spins[edges_a[ei]] != spins[edges_b[ei]]:
                    uu += 1
            for vv in range(n_v):
                if spins[vv] == 1:
                    uu += expo[vv]
            if uu != u:
                audit_fail = True
                return steps, False, u, n_plus, audit_fail
        if target == 1:
            if n_plus == n_v:
                return steps, True, u, n_plus, audit_fail
        elif target == 2:
            if n_plus == 0:
                return steps, True, u, n_plus, audit_fail
        elif target == 3:
            if n_plus == 0 or n_plus == n_v:
                return steps, True, u, n_plus, audit_fail
        elif target == 4:
            if n_int == interior_size:
                return steps, True, u, n_plus, audit_fail
    return steps, False, u, n_plus, audit_fail


@dataclass
class ChainState:
    """One walker: configuration, step counter, rng state, cached energy."""

    config: SpinConfig
    time: int
    rng: np.ndarray
    energy: ExactEnergy

    @classmethod
    def start(cls, g: LatticeGraph, config: SpinConfig, seed: int,
              stream: int = 0) -> "ChainState":
        cfg = config.copy()
        return cls(cfg, 0, derive_stream(seed, stream), delta_h(g, cfg))


def step(state: ChainState, g: LatticeGraph, params: ModelParams,
         n_steps: int = 1) -> ChainState:
    """Advance by n_steps proposals (time advances whether or not accepted)."""
    nbr, cnt = g.neighbor_table()
    a, b = g.edges()
    cfg = state.config.copy()
    rng = state.rng.copy()
    steps, _, u, n_plus, audit = _run_chain(
        nbr, cnt, g.exposure, cfg.spins, np.int64(state.energy.u),
        np.int64(state.energy.n), float(params.h), float(params.beta), rng,
        np.int64(n_steps), TARGET_NONE, a.astype(np.int64), b.astype(np.int64),
        np.int64(0), np.int64(0))
    cfg.plus_count = int(n_plus)
    return ChainState(cfg, state.time + int(steps), rng,
                      ExactEnergy(int(u), int(n_plus)))


@dataclass(frozen=True)
class HittingTimeSample:
    replica: int
    seed: int
    steps: int
    censored: bool
    target: str

    def as_row(self) -> tuple:
        return (self.replica, self.seed, self.steps, int(self.censored))


def hit(g: LatticeGraph, params: ModelParams, start: SpinConfig, target: str,
        max_steps: int, seed: int, replicas: int,
        audit_every: int = 1 << 16) -> list[HittingTimeSample]:
    """Independent hitting-time replicas toward a target set.

    target is one of "all_plus", "all_minus", "either", "interior_plus";
    entry is checked after each step, so a start inside the target still
    takes >= 1 step.  Censored samples report steps = max_steps with the
    flag set.  The incremental (u, n) bookkeeping is recounted from scratch
    every audit_every steps (0 disables); a mismatch aborts the replica.
    """
    if target not in _TARGET_CODES or target == "none":
        raise DomainError(
            f"target must be all_plus / all_minus / either / interior_plus, got {target!r}")
    if max_steps < 1:
        raise DomainError("max_steps must be >= 1")
    code = _TARGET_CODES[target]
    interior = np.int64(g.layer_start[g.N]) if code == TARGET_INTERIOR_PLUS else np.int64(0)
    nbr, cnt = g.neighbor_table()
    a, b = g.edges()
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    e0 = delta_h(g, start)
    out = []
    for i in range(replicas):
        rng = derive_stream(seed, i)
        stream_seed = int(rng[0])
        spins = start.spins.copy()
        steps, hit_flag, _, _, audit = _run_chain(
            nbr, cnt, g.exposure, spins, np.int64(e0.u), np.int64(e0.n),
            float(params.h), float(params.beta), rng, np.int64(max_steps),
            code, a, b, np.int64(audit_every), interior)
        if audit:
            raise RuntimeError(f"replica {i}: incremental energy diverged from recount")
        out.append(HittingTimeSample(i, stream_seed, int(steps),
                                     not bool(hit_flag), target))
    return out


@dataclass
class BalanceReport:
    checked: int
    involution_violations: int
    global_delta_violations: int
    balance_violations: int

    @property
    def ok(self) -> bool:
        return not (self.involution_violations or self.global_delta_violations
                    or self.balance_violations)


def detailed_balance_audit(g: LatticeGraph, params: ModelParams,
                           samples: int, seed: int = 0) -> BalanceReport:
    """Exact single-flip identities on random (configuration, vertex) pairs.

    Checks, in integer arithmetic: the flip delta is an involution
    (delta(s,v) + delta(flip(s,v),v) = 0), it equals the global energy
    difference, and the detailed-balance identity
    log mu(s) - log mu(s') = beta (H(s') - H(s)) holds, i.e.
    [d]_+ - [-d]_+ = d for the exact rational d.
    """
    rng = np.random.default_rng(seed)
    n_v = g.n_vertices
    h = params.h
    inv = glob = bal = 0
    for _ in range(samples):
        bits = rng.integers(0, 2, size=n_v, dtype=np.uint8)
        v = int(rng.integers(0, n_v))
        s = SpinConfig(bits)
        d1 = flip_delta(g, s, v)
        e_before = delta_h(g, s)
        s2 = s.copy()
        s2.flip(v)
        e_after = delta_h(g, s2)
        d2 = flip_delta(g, s2, v)
        if (d1 + d2).as_tuple() != (0, 0):
            inv += 1
        if (e_after - e_before).as_tuple() != d1.as_tuple():
            glob += 1
        d = d1.value(h)
        if max(d, 0) - max(-d, 0) != d:
            bal += 1
    return BalanceReport(samples, inv, glob, bal)


# ---------------------------------------------------------------------------
# exact spectral analysis on enumerable instances
# ---------------------------------------------------------------------------

GAP_MAX_SITES = 20
MIX_MAX_SITES = 10


@njit(cache=True)
def _fill_sym_weights(hs, n_bits, beta, inv_n, W, diag):
    """Precompute the symmetrized kernel: W[s,b] = S(s, s^2^b), diag = S(s,s)."""
    n_states = hs.size
    for s in range(n_states):
        d0 = 1.0
        for b in range(n_bits):
            t = s ^ (1 << b)
            d = hs[t] - hs[s]
            if d > 0.0:
                d0 -= math.exp(-beta * d) * inv_n
                W[s, b] = math.exp(-0.5 * beta * d) * inv_n
            else:
                d0 -= inv_n
                W[s, b] = math.exp(0.5 * beta * d) * inv_n
        diag[s] = d0


@njit(cache=True)
def _power_block(W, diag, w, x, out, n_bits, n_iters):
    """n_iters deflated power steps on (I+S)/2; returns the last Rayleigh quotient."""
    n_states = x.size
    lam = 0.0
    for _ in range(n_iters):
        for s in range(n_states):
            acc = diag[s] * x[s]
            for b in range(n_bits):
                acc += W[s, b] * x[s ^ (1 << b)]
            out[s] = 0.5 * (x[s] + acc)
        dot = 0.0
        for s in range(n_states):
            dot += w[s] * out[s]
        lam = 0.0
        nrm = 0.0
        for s in range(n_states):
            out[s] -= dot * w[s]
            lam += x[s] * out[s]
            nrm += out[s] * out[s]
        nrm = math.sqrt(nrm)
        if nrm == 0.0:
            return 0.0
        for s in range(n_states):
            x[s] = out[s] / nrm
    return lam


def _state_h_floats(g: LatticeGraph, params: ModelParams) -> np.ndarray:
    u, n = state_energies(g, cap_states=1 << GAP_MAX_SITES)
    return u.astype(np.float64) - float(params.h) * n.astype(np.float64)


def spectral_gap_power(g: LatticeGraph, params: ModelParams, tol: float = 1e-10,
                       max_blocks: Optional[int] = None, block: int = 512,
                       flop_budget: float = 4e10) -> dict:
    """Spectral gap 1 - lambda_2 via deflated power iteration.

    The top eigenvector of the symmetrized kernel is known exactly (square
    root of the Gibbs weights); iteration runs on the shifted operator
    (I+S)/2 with that direction projected out, so it converges to the
    second-largest signed eigenvalue.  Rayleigh quotients per block
    converge geometrically and are Aitken-extrapolated to the requested
    tolerance, which matters when lambda_2 and lambda_3 nearly coincide.
    """
    n_v = g.n_vertices
    if n_v > GAP_MAX_SITES:
        raise CapacityError(f"spectral gap supported for |Lambda| <= {GAP_MAX_SITES}")
    hs = _state_h_floats(g, params)
    beta = float(params.beta)
    n_states = hs.size
    if max_blocks is None:
        # near-degenerate lambda_2/lambda_3 clusters (large beta) converge
        # slowly; tiny state spaces can simply afford many iterations
        max_blocks = int(max(2000, min(2e5, flop_budget / (n_states * n_v * block))))
    W = np.empty((n_states, n_v), dtype=np.float64)
    diag = np.empty(n_states, dtype=np.float64)
    _fill_sym_weights(hs, n_v, beta, 1.0 / n_v, W, diag)
    w = np.exp(-0.5 * beta * (hs - hs.min()))
    w /= np.linalg.norm(w)
    rng = np.random.default_rng(20240901)
    x = rng.standard_normal(n_states)
    x -= (w @ x) * w
    x /= np.linalg.norm(x)
    out = np.empty_like(x)
    lams: list[float] = []
    lam_hat = 0.0
    converged = False
    iters = 0
    for nb in range(max_blocks):
        lam = _power_block(W, diag, w, x, out, n_v, block)
        iters += block
        lams.append(lam)
        lam_hat = lam
        if len(lams) >= 3:
            d1 = lams[-2] - lams[-3]
            d2 = lams[-1] - lams[-2]
            if abs(d2) < tol * 1e-3:
                converged = True
                break
            if d1 != 0.0 and 0.0 < d2 / d1 < 1.0:
                r = d2 / d1
                corr = d2 * r / (1.0 - r)
                lam_hat = lams[-1] + corr
                if abs(corr) < tol * 1e-2 and abs(d2) < tol:
                    converged = True
                    break
    lambda2 = 2.0 * lam_hat - 1.0
    return {"gap": 1.0 - lambda2, "lambda2": lambda2, "iterations": iters,
            "converged": converged}


def _dense_operators(g: LatticeGraph, params: ModelParams):
    n_v = g.n_vertices
    hs = _state_h_floats(g, params)
    n_states = hs.size
    beta = float(params.beta)
    t_idx = np.arange(n_states)[:, None] ^ (1 << np.arange(n_v))[None, :]
    d = hs[t_idx] - hs[:, None]
    p_off = np.exp(-beta * np.maximum(d, 0.0)) / n_v
    P = np.zeros((n_states, n_states))
    np.put_along_axis(P, t_idx, p_off, axis=1)
    np.fill_diagonal(P, 1.0 - p_off.sum(axis=1))
    mu = np.exp(-beta * (hs - hs.min()))
    mu /= mu.sum()
    return P, mu, hs


def spectral_gap_dense(g: LatticeGraph, params: ModelParams) -> float:
    """Dense-eigenvalue reference for the gap (cross-check, |Lambda| <= 12)."""
    if g.n_vertices > 12:
        raise CapacityError("dense gap reference supported for |Lambda| <= 12")
    P, mu, _ = _dense_operators(g, params)
    d_half = np.sqrt(mu)
    S = (d_half[:, None] / d_half[None, :]) * P
    S = 0.5 * (S + S.T)
    ev = np.linalg.eigvalsh(S)
    return float(1.0 - ev[-2])


def mixing_time(g: LatticeGraph, params: ModelParams,
                eps_values: Sequence[float] = (0.25,)) -> dict:
    """Worst-start total-variation mixing times t_mix(eps), exact and dense.

    Uses the spectral decomposition of the symmetrized kernel, so any power
    P^t is reconstructed without repeated squaring.
    """
    n_v = g.n_vertices
    if n_v > MIX_MAX_SITES:
        raise CapacityError(f"mixing time supported for |Lambda| <= {MIX_MAX_SITES}")
    P, mu, _ = _dense_operators(g, params)
    d_half = np.sqrt(mu)
    S = (d_half[:, None] / d_half[None, :]) * P
    S = 0.5 * (S + S.T)
    lam, V = np.linalg.eigh(S)
    A = V / d_half[:, None]
    B = V.T * d_half[None, :]

    def tv(t: int) -> float:
        pows = np.sign(lam) ** (t % 2) * np.abs(lam) ** t
        Pt = (A * pows[None, :]) @ B
        return float(0.5 * np.abs(Pt - mu[None, :]).sum(axis=1).max())

    out = {}
    for eps in eps_values:
        lo, hi = 0, 1
        while tv(hi) > eps:
            hi *= 2
            if hi > 10 ** 15:
                out[eps] = None
                break
        else:
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if tv(mid) > eps:
                    lo = mid
                else:
                    hi = mid
            out[eps] = hi
    return out


def exact_chain_analysis(g: LatticeGraph, params: ModelParams,
                         eps_values: Sequence[float] = (0.25,),
                         tol: float = 1e-10, with_mixing: bool = True) -> dict:
    """Spectral gap (power iteration) and, on small instances, mixing times."""
    res = {"spectral_gap": None, "mixing_time": None}
    gap = spectral_gap_power(g, params, tol=tol)
    res["spectral_gap"] = gap["gap"]
    res["gap_detail"] = gap
    if with_mixing and g.n_vertices <= MIX_MAX_SITES:
        res["mixing_time"] = mixing_time(g, params, eps_values)
    return res


# ---------------------------------------------------------------------------
# hitting-time statistics
# ---------------------------------------------------------------------------

@dataclass
class TailReport:
    n_samples: int
    t_hat: float
    rows: list[dict]

    def as_table(self) -> list[tuple]:
        return [(r["t"], r["empirical"], r["exponential"], r["deviation"])
                for r in self.rows]


def tail_statistics(samples: Iterable[Union[HittingTimeSample, int]],
                    t_values: Sequence[float] = (0.5, 1.0, 2.0),
                    min_samples: int = 50) -> TailReport:
    """Empirical tail P(tau > t T-hat) against exp(-t).

    T-hat is the empirical (1 - 1/e)-quantile, the smallest n with
    F-hat(n) >= 1 - 1/e.  Censored samples are excluded; fewer than
    min_samples uncensored samples is an error.
    """
    steps = []
    for s in samples:
        if isinstance(s, HittingTimeSample):
            if not s.censored:
                steps.append(s.steps)
        else:
            steps.append(int(s))
    m = len(steps)
    if m < min_samples:
        raise InsufficientSamplesError(
            f"need >= {min_samples} uncensored samples, got {m}")
    xs = np.sort(np.asarray(steps, dtype=np.float64))
    qlevel = 1.0 - math.exp(-1.0)
    k = math.ceil(qlevel * m)
    t_hat = float(xs[k - 1])
    rows = []
    for t in t_values:
        emp = float(np.mean(xs > t * t_hat))
        rows.append({"t": float(t), "empirical": emp,
                     "exponential": math.exp(-t),
                     "deviation": abs(emp - math.exp(-t))})
    return TailReport(m, t_hat, rows)
