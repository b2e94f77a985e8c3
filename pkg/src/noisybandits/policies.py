"""Exponential-weights policies with graph-aware loss estimators.

One template covers the whole family: play arm i with probability
proportional to exp(-eta_t * Lhat_i), then update Lhat with an
importance-weighted estimate built from the feedback vector and the
observation graph. The estimator variants are

  basic      lhat_i = c_i * 1{s(I,i) > 0} / (sum_j p_j s(j,i) + gamma)
  truncated  lhat_i = c_i * 1{s(I,i) >= eps} / (sum_j p_j s(j,i) 1{s(j,i) >= eps} + gamma)
  weighted   lhat_i = s(I,i)^delta * c_i / (sum_j p_j s(j,i)^(1+delta) + gamma)

All are unbiased at gamma = 0 and biased downward for gamma > 0. The
basic numerator carries the positivity indicator so that the identity
graph reduces the template to the standard bandit algorithm; it changes
nothing on graphs whose weights are all positive.

Presets: exp3 (basic on the identity graph), exp3-ixb (basic on a
binarized graph), exp3-ixt (truncated), exp3-wix (weighted).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGraphError, ProtocolViolationError
from .graphs import ObservationGraph, identity_graph

POLICY_NAMES = ("exp3", "exp3-ixb", "exp3-ixt", "exp3-wix")


@dataclass(frozen=True)
class Estimator:
    """Loss-estimate configuration: kind plus its threshold/exponent."""

    kind: str = "weighted"
    eps: float = 0.0
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("basic", "truncated", "weighted"):
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        if self.delta < 1.0:
            raise ValueError("delta must be >= 1 (second-moment bound fails below)")


@dataclass(frozen=True)
class StaticRates:
    eta: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class AdaptiveRates:
    """eta_t = sqrt(log N / (2(1+R+R^2)(N + sum of past Q))), gamma_t = R eta_t."""

    noise_bound: float = 1.0

    def __post_init__(self):
        if self.noise_bound < 0:
            raise ValueError("noise bound must be >= 0")


@dataclass
class PolicyState:
    """The learner's memory across rounds."""

    cum_est: np.ndarray  # Lhat, cumulative loss estimates
    t: int = 0  # rounds completed
    q_history: list = field(default_factory=list)
    q_sum: float = 0.0
    eta: float = 0.0
    gamma: float = 0.0
    p: np.ndarray | None = None
    chosen: int = -1
    awaiting_feedback: bool = False


def _weights_of(g) -> np.ndarray:
    return g.weights if isinstance(g, ObservationGraph) else np.asarray(g, dtype=np.float64)


def action_distribution(cum_est: np.ndarray, eta: float) -> np.ndarray:
    """Softmax over -eta * Lhat, stabilized by shifting out min(eta * Lhat)."""
    cum_est = np.asarray(cum_est, dtype=np.float64)
    if not np.all(np.isfinite(cum_est)):
        raise ValueError("cumulative estimates must be finite")
    if eta <= 0:
        raise ValueError("eta must be > 0")
    z = eta * (cum_est - cum_est.min())
    w = np.exp(-z)
    return w / w.sum()


def sample_arm(p: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw using a single uniform."""
    u = rng.random()
    acc = 0.0
    for i in range(p.shape[0] - 1):
        acc += p[i]
        if u <= acc:
            return i
    return p.shape[0] - 1


def _denominators(p, feat, gamma):
    d = (p[:, None] * feat).sum(axis=0) + gamma
    if np.any(d <= 0.0):
        raise DegenerateGraphError(
            "zero estimate denominator: some arm has no positive-probability observer"
        )
    return d


def estimate_basic(p, g, chosen, feedback, gamma=0.0) -> np.ndarray:
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    w = _weights_of(g)
    d = _denominators(np.asarray(p), w, gamma)
    num = np.asarray(feedback) * (w[chosen] > 0.0)
    return num / d


def estimate_truncated(p, g, chosen, feedback, gamma, eps) -> np.ndarray:
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    w = _weights_of(g)
    keep = w >= eps
    d = _denominators(np.asarray(p), w * keep, gamma)
    num = np.asarray(feedback) * keep[chosen]
    return num / d


def estimate_weighted(p, g, chosen, feedback, gamma, delta=1.0) -> np.ndarray:
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if delta < 1.0:
        raise ValueError("delta must be >= 1")
    w = _weights_of(g)
    feat = w * w if delta == 1.0 else w ** (1.0 + delta)
    d = _denominators(np.asarray(p), feat, gamma)
    num = (w[chosen] if delta == 1.0 else w[chosen] ** delta) * np.asarray(feedback)
    return num / d


def estimate(p, g, chosen, feedback, gamma, estimator: Estimator) -> np.ndarray:
    if estimator.kind == "basic":
        return estimate_basic(p, g, chosen, feedback, gamma)
    if estimator.kind == "truncated":
        return estimate_truncated(p, g, chosen, feedback, gamma, estimator.eps)
    return estimate_weighted(p, g, chosen, feedback, gamma, estimator.delta)


def compute_q(p, g, gamma, estimator: Estimator) -> float:
    """Exploration mass Q_t = sum_i p_i / (estimator denominator of arm i)."""
    w = _weights_of(g)
    p = np.asarray(p)
    if estimator.kind == "weighted":
        feat = w * w if estimator.delta == 1.0 else w ** (1.0 + estimator.delta)
    elif estimator.kind == "truncated":
        feat = w * (w >= estimator.eps)
    else:
        feat = w
    d = _denominators(p, feat, gamma)
    return float((p / d).sum())


def estimator_matrices(weights: np.ndarray, estimator: Estimator) -> tuple[np.ndarray, np.ndarray]:
    """(numerator factor, denominator feature) matrices for the fused loop.

    With (numfac, feat) = estimator_matrices(w, est), the round's estimate
    after playing arm a is numfac[a] * c / ((p[:, None] * feat).sum(0) + gamma).
    """
    w = np.asarray(weights, dtype=np.float64)
    if estimator.kind == "basic":
        return (w > 0.0).astype(np.float64), w.copy()
    if estimator.kind == "truncated":
        keep = (w >= estimator.eps).astype(np.float64)
        return keep, w * keep
    if estimator.delta == 1.0:
        return w.copy(), w * w
    return w**estimator.delta, w ** (1.0 + estimator.delta)


def adaptive_rates(q_history, n_arms: int, noise_bound: float) -> tuple[float, float]:
    """Anytime rate pair (eta_t, gamma_t) from the realized Q values so far."""
    if n_arms < 2:
        raise ValueError("adaptive rates need at least 2 arms (log N degenerates)")
    q_sum = 0.0
    for q in q_history:
        if q < 0:
            raise ValueError("Q values must be >= 0")
        q_sum += q
    return _rates_from_sum(q_sum, n_arms, noise_bound)


def _rates_from_sum(q_sum: float, n_arms: int, noise_bound: float) -> tuple[float, float]:
    r = noise_bound
    eta = math.sqrt(math.log(n_arms) / (2.0 * (1.0 + r + r * r) * (n_arms + q_sum)))
    return eta, r * eta


def ixb_transform(g: ObservationGraph, eps: float) -> ObservationGraph:
    """Binarize: weights below eps drop to 0, the rest (positive) become 1.

    At eps = 0 every positive weight becomes 1 (the eps -> 0+ limit), so
    threshold sweeps over [0, 1] are well defined. The result feeds the
    basic estimator; the combination is the biased baseline without a
    performance guarantee.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    w = _weights_of(g)
    binary = np.where((w >= eps) & (w > 0.0), 1.0, 0.0)
    return ObservationGraph(g.n, binary)


class ExpWeightsPolicy:
    """The template bound to one estimator, one rate schedule and one
    view of the observation graph.

    graph_mode: "observed" uses the graph as revealed by the environment;
    "identity" discards all side observations (the vanilla bandit
    baseline); ("binarize", eps) applies ixb_transform.
    """

    def __init__(
        self,
        n_arms: int,
        estimator: Estimator,
        rates,
        graph_mode="observed",
        name: str | None = None,
        noise_bound: float = 1.0,
    ):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = n_arms
        self.estimator = estimator
        self.rates = rates
        self.graph_mode = graph_mode
        self.name = name or estimator.kind
        self.noise_bound = noise_bound
        self._transform_cache: tuple[int, ObservationGraph] | None = None
        # Lemma-1 safety: gamma >= eta * R keeps eta * lhat >= -1
        if isinstance(rates, StaticRates) and rates.gamma < rates.eta * noise_bound:
            warnings.warn(
                f"static rates eta={rates.eta}, gamma={rates.gamma} violate the "
                f"safety condition gamma >= eta*R at R={noise_bound}; negative "
                f"estimates may leave the exp(-x) <= 1-x+x^2 regime",
                RuntimeWarning,
                stacklevel=2,
            )

    def start(self) -> PolicyState:
        return PolicyState(cum_est=np.zeros(self.n_arms))

    def _rates(self, state: PolicyState) -> tuple[float, float]:
        if isinstance(self.rates, StaticRates):
            return self.rates.eta, self.rates.gamma
        return _rates_from_sum(state.q_sum, self.n_arms, self.rates.noise_bound)

    def effective_graph(self, g: ObservationGraph) -> ObservationGraph:
        if self.graph_mode == "observed":
            return g
        if self.graph_mode == "identity":
            return identity_graph(self.n_arms)
        mode, eps = self.graph_mode
        if mode != "binarize":
            raise ValueError(f"unknown graph mode {self.graph_mode!r}")
        if self._transform_cache is not None and self._transform_cache[0] == id(g):
            return self._transform_cache[1]
        transformed = ixb_transform(g, eps)
        self._transform_cache = (id(g), transformed)
        return transformed

    def step(self, state: PolicyState, rng: np.random.Generator) -> tuple[int, np.ndarray]:
        """Draw the round's arm; returns (arm, action distribution)."""
        if state.awaiting_feedback:
            raise ProtocolViolationError("step called twice without ingesting feedback")
        eta, gamma = self._rates(state)
        p = action_distribution(state.cum_est, eta)
        arm = sample_arm(p, rng)
        state.eta, state.gamma = eta, gamma
        state.p = p
        state.chosen = arm
        state.awaiting_feedback = True
        return arm, p

    def ingest(self, state: PolicyState, feedback: np.ndarray, g: ObservationGraph) -> np.ndarray:
        """Fold the round's feedback into the cumulative estimates."""
        if not state.awaiting_feedback:
            raise ProtocolViolationError("feedback arrived before the arm was played")
        eff = self.effective_graph(g)
        lhat = estimate(state.p, eff, state.chosen, feedback, state.gamma, self.estimator)
        q = compute_q(state.p, eff, state.gamma, self.estimator)
        state.cum_est = state.cum_est + lhat
        state.q_history.append(q)
        state.q_sum += q
        state.t += 1
        state.awaiting_feedback = False
        return lhat


def make_policy(
    name: str,
    n_arms: int,
    eps: float | None = None,
    delta: float = 1.0,
    rates=None,
    noise_bound: float = 1.0,
) -> ExpWeightsPolicy:
    """Build one of the named policies.

    exp3      basic estimator on the identity graph (ignores side info)
    exp3-ixb  basic estimator on the eps-binarized graph
    exp3-ixt  truncated estimator at threshold eps
    exp3-wix  weighted estimator with exponent delta (default 1)
    """
    if name not in POLICY_NAMES:
        raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
    if rates is None:
        rates = AdaptiveRates(noise_bound)
    if name == "exp3":
        est, mode = Estimator("basic"), "identity"
    elif name == "exp3-ixb":
        if eps is None:
            raise ValueError("exp3-ixb needs a threshold eps")
        est, mode = Estimator("basic"), ("binarize", eps)
    elif name == "exp3-ixt":
        if eps is None:
            raise ValueError("exp3-ixt needs a threshold eps")
        est, mode = Estimator("truncated", eps=eps), "observed"
    else:
        est, mode = Estimator("weighted", delta=delta), "observed"
    return ExpWeightsPolicy(n_arms, est, rates, mode, name, noise_bound)
