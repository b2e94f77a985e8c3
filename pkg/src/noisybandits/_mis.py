"""Exact maximum-independent-set search on bitset adjacency.

Branch-and-bound with greedy clique-cover pruning. Two interchangeable
kernels: a numba ``@njit`` one working on int64 masks (n <= 63) and a
pure-Python one on arbitrary-width ints (any n, and the fallback when
numba is disabled). Both walk the search tree in the same order, so
they visit the same number of nodes and return the same size.
"""

from __future__ import annotations

import numpy as np

from .backend import NUMBA_ENABLED
from .errors import BudgetExceededError

DEFAULT_NODE_BUDGET = 10_000_000

_STATUS_OK = 0
_STATUS_BUDGET = 1


def _mis_core_python(
    adj: list[int], n: int, budget: int, initial_best: int = 0
) -> tuple[int, int, int]:
    """Shared search logic on Python-int bitsets.

    initial_best must be a valid lower bound on the answer (e.g. the MIS
    size of a supergraph); the search then only has to certify or beat it.
    Returns (best size, nodes visited, status).
    """
    full = (1 << n) - 1
    best = initial_best
    nodes = 0
    stack = [(full, 0)]
    while stack:
        cand, size = stack.pop()
        nodes += 1
        if nodes > budget:
            return best, nodes, _STATUS_BUDGET
        if size > best:
            best = size

        # absorb vertices with no neighbor among the candidates
        iso = 0
        m = cand
        while m:
            bit = m & -m
            v = bit.bit_length() - 1
            if adj[v] & cand == 0:
                iso |= bit
            m ^= bit
        if iso:
            size += iso.bit_count()
            cand &= ~iso
            if size > best:
                best = size
        if cand == 0:
            continue
        if size + cand.bit_count() <= best:
            continue

        # greedy clique cover of the candidates: an independent set takes
        # at most one vertex per clique, so the count bounds what remains
        need = best - size
        count = 0
        rem = cand
        while rem:
            if count > need:
                break
            u_bit = rem & -rem
            u = u_bit.bit_length() - 1
            rem ^= u_bit
            grow = rem & adj[u]
            while grow:
                w_bit = grow & -grow
                w = w_bit.bit_length() - 1
                rem &= ~w_bit
                grow &= adj[w]
                grow &= ~w_bit
            count += 1
        if count <= need:
            continue

        # branch on the highest-degree candidate
        v = -1
        v_deg = -1
        m = cand
        while m:
            bit = m & -m
            u = bit.bit_length() - 1
            deg = (adj[u] & cand).bit_count()
            if deg > v_deg:
                v_deg = deg
                v = u
            m ^= bit
        v_bit = 1 << v
        stack.append((cand & ~v_bit, size))  # exclude v
        stack.append((cand & ~adj[v] & ~v_bit, size + 1))  # include v
    return best, nodes, _STATUS_OK


if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True)
    def _popcount64(x):
        x = x - ((x >> 1) & 0x5555555555555555)
        x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
        return (x * 0x0101010101010101) >> 56

    @njit(cache=True)
    def _mis_core_numba(adj, n, budget, initial_best=0):  # pragma: no cover
        full = (np.int64(1) << np.int64(n)) - np.int64(1)
        best = initial_best
        nodes = 0
        cap = 2 * n + 4
        cand_stack = np.empty(cap, dtype=np.int64)
        size_stack = np.empty(cap, dtype=np.int64)
        sp = 0
        cand_stack[sp] = full
        size_stack[sp] = 0
        sp += 1
        while sp > 0:
            sp -= 1
            cand = cand_stack[sp]
            size = size_stack[sp]
            nodes += 1
            if nodes > budget:
                return best, nodes, _STATUS_BUDGET
            if size > best:
                best = size

            iso = np.int64(0)
            m = cand
            while m != 0:
                bit = m & -m
                v = _popcount64(bit - 1)
                if adj[v] & cand == 0:
                    iso |= bit
                m ^= bit
            if iso != 0:
                size += _popcount64(iso)
                cand &= ~iso
                if size > best:
                    best = size
            if cand == 0:
                continue
            if size + _popcount64(cand) <= best:
                continue

            need = best - size
            count = 0
            rem = cand
            while rem != 0:
                if count > need:
                    break
                u_bit = rem & -rem
                u = _popcount64(u_bit - 1)
                rem ^= u_bit
                grow = rem & adj[u]
                while grow != 0:
                    w_bit = grow & -grow
                    w = _popcount64(w_bit - 1)
                    rem &= ~w_bit
                    grow &= adj[w]
                    grow &= ~w_bit
                count += 1
            if count <= need:
                continue

            v = -1
            v_deg = -1
            m = cand
            while m != 0:
                bit = m & -m
                u = _popcount64(bit - 1)
                deg = _popcount64(adj[u] & cand)
                if deg > v_deg:
                    v_deg = deg
                    v = u
                m ^= bit
            v_bit = np.int64(1) << np.int64(v)
            cand_stack[sp] = cand & ~v_bit
            size_stack[sp] = size
            sp += 1
            cand_stack[sp] = cand & ~adj[v] & ~v_bit
            size_stack[sp] = size + 1
            sp += 1
        return best, nodes, _STATUS_OK


def max_independent_set_size(
    adj_masks: list[int],
    n: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    initial_lower: int = 0,
) -> int:
    """Exact MIS size of a symmetric bitset adjacency (no self-bits).

    initial_lower, when given, must be a valid lower bound on the answer.
    Raises BudgetExceededError when the search tree exceeds node_budget.
    """
    if n < 1:
        raise ValueError("graph must have at least one node")
    if NUMBA_ENABLED and n <= 63:
        adj_arr = np.array(adj_masks, dtype=np.int64)
        best, _, status = _mis_core_numba(adj_arr, n, node_budget, initial_lower)
    else:
        best, _, status = _mis_core_python(list(adj_masks), n, node_budget, initial_lower)
    if status == _STATUS_BUDGET:
        raise BudgetExceededError(
            f"independent-set search exceeded {node_budget} nodes (n={n})"
        )
    return best
