"""Weighted observation digraphs and the effective independence number.

An observation graph on n arms is an n-by-n weight matrix with entries in
[0, 1]; entry (i, j) is the fidelity of the side observation of arm j's
loss when arm i is played (1 = exact, 0 = pure noise). Thresholding at
eps keeps the arcs of weight >= eps, and the effective independence
number is the minimum over thresholds of alpha(eps) / eps**2, where
alpha is the exact independence number of the thresholded digraph
(independence taken on the symmetrized arc set).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._mis import DEFAULT_NODE_BUDGET, max_independent_set_size


@dataclass(frozen=True)
class ObservationGraph:
    """Arm-count and weight matrix; diagonal 1 unless explicitly overridden."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_weights(cls, weights, require_unit_diagonal: bool = True) -> "ObservationGraph":
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        g = cls(w.shape[0], w)
        if require_unit_diagonal and not np.all(np.diag(w) == 1.0):
            raise ValueError("diagonal weights must all equal 1")
        return g

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "weights": [float(x) for x in self.weights.ravel()]}
        )

    @classmethod
    def from_json(cls, text: str, require_unit_diagonal: bool = True) -> "ObservationGraph":
        obj = json.loads(text)
        if set(obj) != {"n", "weights"}:
            raise ValueError("graph JSON must have exactly the keys 'n' and 'weights'")
        n = int(obj["n"])
        flat = np.asarray(obj["weights"], dtype=np.float64)
        if flat.size != n * n:
            raise ValueError(f"expected {n * n} weights, got {flat.size}")
        return cls.from_weights(flat.reshape(n, n), require_unit_diagonal)


@dataclass(frozen=True)
class BinaryDigraph:
    """Unweighted digraph as one arc bitset per node; no self-loops."""

    n: int
    arcs: tuple  # arcs[i] has bit j set iff arc i -> j is present

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph must have at least one node")
        full = (1 << self.n) - 1
        for i, mask in enumerate(self.arcs):
            if mask & ~full:
                raise ValueError(f"arc bits of node {i} fall outside [0, n)")
            if mask & (1 << i):
                raise ValueError(f"node {i} carries a self-loop")

    def symmetrized(self) -> list[int]:
        """Masks of the underlying undirected graph (arc in either direction)."""
        sym = list(self.arcs)
        for i in range(self.n):
            m = self.arcs[i]
            while m:
                bit = m & -m
                j = bit.bit_length() - 1
                sym[j] |= 1 << i
                m ^= bit
        return sym

    def arc_set(self) -> set[tuple[int, int]]:
        out = set()
        for i in range(self.n):
            m = self.arcs[i]
            while m:
                bit = m & -m
                out.add((i, bit.bit_length() - 1))
                m ^= bit
        return out


@dataclass(frozen=True)
class AlphaStarResult:
    """Minimum of alpha(eps)/eps**2 with the minimizing threshold and curve."""

    alpha_star: float
    epsilon_star: float
    curve: list = field(default_factory=list)  # (eps_candidate, alpha(eps_candidate))


def threshold(g: ObservationGraph, eps: float) -> BinaryDigraph:
    """Arcs i -> j (i != j) with weight >= eps; the diagonal is dropped."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    keep = g.weights >= eps
    np.fill_diagonal(keep, False)
    arcs = []
    for i in range(g.n):
        mask = 0
        for j in np.flatnonzero(keep[i]):
            mask |= 1 << int(j)
        arcs.append(mask)
    return BinaryDigraph(g.n, tuple(arcs))


def independence_number(
    g: BinaryDigraph, node_budget: int = DEFAULT_NODE_BUDGET
) -> int:
    """Exact maximum independent set size on the symmetrized arc set.

    Raises BudgetExceededError when branch-and-bound exceeds node_budget.
    """
    return max_independent_set_size(g.symmetrized(), g.n, node_budget)


def effective_independence_number(
    g: ObservationGraph, node_budget: int = DEFAULT_NODE_BUDGET
) -> AlphaStarResult:
    """min over eps of alpha(eps)/eps**2, evaluated at every candidate.

    alpha(eps)/eps**2 is piecewise decreasing between consecutive distinct
    weights, so the minimum over (0, 1] is attained at a distinct positive
    off-diagonal weight or at 1. Candidates are scanned in increasing
    order, warm-starting each search with the previous alpha (alpha(eps)
    is non-decreasing). Ties are broken toward the largest minimizer.
    """
    off = g.weights[~np.eye(g.n, dtype=bool)] if g.n > 1 else np.empty(0)
    candidates = sorted(set(float(w) for w in off if w > 0.0) | {1.0})

    curve = []
    best_val = math.inf
    best_eps = 0.0
    prev_alpha = 1
    for eps in candidates:
        dg = threshold(g, eps)
        # alpha(eps) is non-decreasing, so the previous value warm-starts
        alpha = max_independent_set_size(
            dg.symmetrized(), g.n, node_budget, initial_lower=prev_alpha
        )
        prev_alpha = alpha
        curve.append((eps, alpha))
        val = alpha / (eps * eps)
        if val <= best_val:  # <= keeps the largest eps among exact ties
            best_val = val
            best_eps = eps
    return AlphaStarResult(alpha_star=best_val, epsilon_star=best_eps, curve=curve)


def gen_grid_geometric(k: int, weight_rule: str) -> ObservationGraph:
    """k*k planar grid with distance-decaying symmetric weights.

    Rule ``min_3_over_d2`` uses unit grid spacing and weight min{3/d^2, 1}
    (neighbor distance 1), so exactly the pairs with d^2 <= 3 share exact
    observations. Rule ``inv_one_plus_d2`` places the grid on the unit
    square [0, 1]^2 (spacing 1/(k-1)) and uses weight 1/(1 + d^2); on this
    normalized family the effective independence number stays bounded as
    the grid is refined.
    """
    if k < 1:
        raise ValueError("grid side length must be >= 1")
    if weight_rule not in ("inv_one_plus_d2", "min_3_over_d2"):
        raise ValueError(f"unknown weight rule {weight_rule!r}")
    n = k * k
    xs, ys = np.meshgrid(np.arange(k, dtype=np.float64), np.arange(k, dtype=np.float64))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    if weight_rule == "inv_one_plus_d2" and k > 1:
        pts = pts / (k - 1)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    if weight_rule == "inv_one_plus_d2":
        w = 1.0 / (1.0 + d2)
    else:
        with np.errstate(divide="ignore"):
            w = np.minimum(3.0 / np.where(d2 > 0, d2, np.inf), 1.0)
    np.fill_diagonal(w, 1.0)
    return ObservationGraph(n, w)


def gen_random_uniform(
    n: int, lo: float, hi: float, rng: np.random.Generator
) -> ObservationGraph:
    """Directed graph with i.i.d. U(lo, hi) off-diagonal weights, diagonal 1."""
    if n < 1:
        raise ValueError("need at least one node")
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"need 0 <= lo <= hi <= 1, got lo={lo}, hi={hi}")
    w = rng.uniform(lo, hi, size=(n, n))
    np.fill_diagonal(w, 1.0)
    return ObservationGraph(n, w)


def identity_graph(n: int) -> ObservationGraph:
    """The bandit graph: unit diagonal, all side observations pure noise."""
    if n < 1:
        raise ValueError("need at least one node")
    return ObservationGraph(n, np.eye(n))


def q_upper_bound(alpha_star: float, n: int, gamma: float) -> float:
    """Diagnostic ceiling for the realized exploration mass Q_t.

    2*a*(1 + log(1 + (n^2/gamma + n^2 + n)/a)) with a = alpha_star; valid
    for any positive gamma.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if alpha_star < 1.0:
        raise ValueError("alpha_star must be >= 1")
    return 2.0 * alpha_star * (
        1.0 + math.log(1.0 + (n * n / gamma + n * n + n) / alpha_star)
    )
