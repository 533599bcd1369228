"""Numba kernels for exhaustive state-space analysis.

States are integers 0..2^|Lambda|-1, bit i being the spin of canonical
vertex i.  The landscape sweep processes states in increasing exact-energy
order, merging single-flip-adjacent sublevel components with a union-find;
a component's minima "die" (get their stability level assigned) at the
level where their component first absorbs a strictly lower state.  Equal
keys are exact ties, so plateaus behave as single levels regardless of the
processing order inside a level.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def sweep(order, keys, n_bits, pairs_a, pairs_b):
    """Union-find sublevel sweep.

    Returns (v_key, saddle, phi_state):
      v_key[s]  : stability level of s in exact key units, -1 if s never
                  sees a strictly lower state (global minima);
      saddle[s] : state whose level realized the death of s;
      phi_state[k]: first state at whose level pairs (a_k, b_k) connect.
    """
    n_states = keys.shape[0]
    parent = np.full(n_states, -1, np.int32)
    min_key = np.zeros(n_states, np.int64)
    head = np.full(n_states, -1, np.int32)
    tail = np.full(n_states, -1, np.int32)
    nxt = np.full(n_states, -1, np.int32)
    v_key = np.full(n_states, -1, np.int64)
    saddle = np.full(n_states, -1, np.int32)
    n_pairs = pairs_a.shape[0]
    phi_state = np.full(n_pairs, -1, np.int32)
    pairs_open = n_pairs

    for oi in range(n_states):
        s = order[oi]
        parent[s] = s
        min_key[s] = keys[s]
        head[s] = s
        tail[s] = s
        nxt[s] = -1
        ks = np.int64(keys[s])
        for b in range(n_bits):
            t = s ^ (np.int32(1) << b)
            if parent[t] == -1:
                continue
            ra = _find(parent, s)
            rb = _find(parent, t)
            if ra == rb:
                continue
            if min_key[ra] == min_key[rb]:
                keep, dead = (ra, rb) if ra < rb else (rb, ra)
                nxt[tail[keep]] = head[dead]
                tail[keep] = tail[dead]
                head[dead] = -1
            else:
                keep, dead = (ra, rb) if min_key[ra] < min_key[rb] else (rb, ra)
                x = head[dead]
                dk = min_key[dead]
                while x != -1:
                    v_key[x] = ks - dk
                    saddle[x] = s
                    x = nxt[x]
                head[dead] = -1
            parent[dead] = keep
        if pairs_open > 0:
            for pi in range(n_pairs):
                if phi_state[pi] == -1:
                    a = pairs_a[pi]
                    b2 = pairs_b[pi]
                    if parent[a] != -1 and parent[b2] != -1:
                        if _find(parent, a) == _find(parent, b2):
                            phi_state[pi] = s
                            pairs_open -= 1
    return v_key, saddle, phi_state


@njit(cache=True)
def state_u_chunk(start, stop, edges_a, edges_b, expo_v, expo_w, out_u, out_n):
    """Disagreement count u and plus count n for states start..stop-1."""
    for s in range(start, stop):
        u = 0
        for e in range(edges_a.shape[0]):
            u += ((s >> edges_a[e]) ^ (s >> edges_b[e])) & 1
        for j in range(expo_v.shape[0]):
            u += expo_w[j] * ((s >> expo_v[j]) & 1)
        n = 0
        x = s
        while x:
            x &= x - 1
            n += 1
        out_u[s - start] = u
        out_n[s - start] = n
