import numpy as np
import pytest

from noisybandits.graphs import BinaryDigraph


def random_binary_digraph(n: int, p: float, rng: np.random.Generator) -> BinaryDigraph:
    a = rng.random((n, n)) < p
    np.fill_diagonal(a, False)
    arcs = tuple(int(sum(1 << int(j) for j in np.flatnonzero(a[i]))) for i in range(n))
    return BinaryDigraph(n, arcs)


def mis_by_enumeration(sym_masks: list[int], n: int) -> int:
    """Independent oracle: subset dynamic program over all 2^n subsets."""
    mis = np.zeros(1 << n, dtype=np.int8)
    closed = [sym_masks[v] | (1 << v) for v in range(n)]
    for subset in range(1, 1 << n):
        low = subset & -subset
        v = low.bit_length() - 1
        without_v = mis[subset ^ low]
        with_v = 1 + mis[subset & ~closed[v]]
        mis[subset] = max(without_v, with_v)
    return int(mis[(1 << n) - 1])


@pytest.fixture
def rng():
    return np.random.default_rng(0xBAD5EED)
