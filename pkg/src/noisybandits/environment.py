"""The interaction protocol: losses, noise, and feedback synthesis.

Each round the environment holds a loss vector l_t in [0,1]^N and an
observation graph; after the learner plays arm I, it sees for every arm i

    c_i = s(I,i) * l_i + (1 - s(I,i)) * xi_i

with xi a bounded zero-mean noise draw. The unit diagonal guarantees the
learner always observes its own loss exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import HorizonExceededError
from .graphs import ObservationGraph

NOISE_KINDS = ("uniform_symmetric", "rademacher_scaled", "zero")


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean noise with |xi| <= bound."""

    bound: float = 1.0
    kind: str = "uniform_symmetric"

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("noise bound must be >= 0")
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "zero" or self.bound == 0.0:
            return np.zeros(size)
        if self.kind == "uniform_symmetric":
            return rng.uniform(-self.bound, self.bound, size=size)
        # rademacher_scaled: +-bound with probability 1/2 each
        return self.bound * (2.0 * rng.integers(0, 2, size=size) - 1.0)


@dataclass(frozen=True)
class LossSequence:
    """T x N matrix of losses in [0, 1]."""

    horizon: int
    n_arms: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.horizon, self.n_arms):
            raise ValueError(f"losses must be {self.horizon}x{self.n_arms}, got {v.shape}")
        if np.any(v < 0.0) or np.any(v > 1.0) or not np.all(np.isfinite(v)):
            raise ValueError("losses must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"arm_{i}" for i in range(self.n_arms)])
        for row in self.values:
            writer.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "LossSequence":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty loss CSV")
        header = rows[0]
        n = len(header)
        if header != [f"arm_{i}" for i in range(n)]:
            raise ValueError("loss CSV header must be arm_0..arm_{N-1}")
        values = np.array([[float(x) for x in row] for row in rows[1:]], dtype=np.float64)
        return cls(values.shape[0], n, values)


@dataclass(frozen=True)
class EnvironmentStep:
    """Full record of one protocol round."""

    round: int
    graph: ObservationGraph
    losses: np.ndarray
    feedback: np.ndarray
    noise: np.ndarray
    chosen: int
    incurred: float


def gen_random_walk_losses(
    n_arms: int,
    n_walks: int,
    horizon: int,
    step_sigma: float,
    rng: np.random.Generator,
    interleaving: str = "per_arm",
) -> LossSequence:
    """Interleaved clipped Gaussian random walks.

    All walks start at independent U(0,1) values, take N(0, sigma^2)
    steps and are clipped to [0,1]. Two interleaving rules:

    * ``per_arm`` (default): every arm owns n_walks walks and cycles
      through them, reading walk (t mod n_walks) at its (t div n_walks)-th
      step. Arms have genuinely different loss levels, so there is a
      meaningful best arm to compete with.
    * ``rotation``: a shared pool of n_walks walks advanced every round;
      arm i reads walk (i + t) mod n_walks at round t. Arms share the
      pool and are statistically exchangeable.
    """
    if n_arms < 1 or n_walks < 1 or horizon < 1:
        raise ValueError("n_arms, n_walks and horizon must be >= 1")
    if step_sigma <= 0:
        raise ValueError("step_sigma must be > 0")
    if interleaving == "per_arm":
        length = -(-horizon // n_walks)  # steps each walk contributes
        walks = np.empty((n_arms, n_walks, length))
        walks[:, :, 0] = rng.uniform(0.0, 1.0, size=(n_arms, n_walks))
        if length > 1:
            steps = rng.normal(0.0, step_sigma, size=(n_arms, n_walks, length - 1))
            for s in range(1, length):
                walks[:, :, s] = np.clip(walks[:, :, s - 1] + steps[:, :, s - 1], 0.0, 1.0)
        t_idx = np.arange(horizon)
        values = walks[:, t_idx % n_walks, t_idx // n_walks].T
    elif interleaving == "rotation":
        walks = np.empty((n_walks, horizon))
        walks[:, 0] = rng.uniform(0.0, 1.0, size=n_walks)
        if horizon > 1:
            steps = rng.normal(0.0, step_sigma, size=(n_walks, horizon - 1))
            for t in range(1, horizon):
                walks[:, t] = np.clip(walks[:, t - 1] + steps[:, t - 1], 0.0, 1.0)
        t_idx = np.arange(horizon)
        arm_idx = np.arange(n_arms)
        assignment = (arm_idx[None, :] + t_idx[:, None]) % n_walks  # (T, N)
        values = walks[assignment, t_idx[:, None]]
    else:
        raise ValueError(f"unknown interleaving rule {interleaving!r}")
    return LossSequence(horizon, n_arms, values)


def emit_feedback(
    g: ObservationGraph, losses: np.ndarray, chosen: int, noise: np.ndarray
) -> np.ndarray:
    """c_i = s(chosen,i)*l_i + (1-s(chosen,i))*xi_i, componentwise."""
    losses = np.asarray(losses, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if losses.shape != (g.n,) or noise.shape != (g.n,):
        raise ValueError("losses and noise must be length-n vectors")
    if not 0 <= chosen < g.n:
        raise ValueError(f"chosen arm {chosen} out of range")
    s = g.weights[chosen]
    return s * losses + (1.0 - s) * noise


class Environment:
    """Stateful protocol runner over a fixed loss sequence.

    ``graphs`` is either a single ObservationGraph (static, the default
    setting) or a length-T sequence of per-round graphs.
    """

    def __init__(
        self,
        losses: LossSequence,
        graphs,
        noise: NoiseModel,
        rng: np.random.Generator,
    ):
        self.losses = losses
        if isinstance(graphs, ObservationGraph):
            self._graphs = None
            self._static_graph = graphs
            if graphs.n != losses.n_arms:
                raise ValueError("graph size does not match arm count")
        else:
            self._graphs = list(graphs)
            self._static_graph = None
            if len(self._graphs) != losses.horizon:
                raise ValueError("graph schedule length must equal the horizon")
            for g in self._graphs:
                if g.n != losses.n_arms:
                    raise ValueError("graph size does not match arm count")
        self.noise = noise
        self.rng = rng
        self.t = 0  # rounds completed

    @property
    def n_arms(self) -> int:
        return self.losses.n_arms

    @property
    def horizon(self) -> int:
        return self.losses.horizon

    def graph_at(self, t: int) -> ObservationGraph:
        return self._static_graph if self._graphs is None else self._graphs[t]

    def step(self, action: int, rng: np.random.Generator | None = None):
        """Play ``action``; returns (incurred loss, EnvironmentStep)."""
        if self.t >= self.horizon:
            raise HorizonExceededError(f"environment finished after {self.horizon} rounds")
        if not 0 <= action < self.n_arms:
            raise ValueError(f"action {action} out of range")
        g = self.graph_at(self.t)
        loss_row = self.losses.values[self.t]
        xi = self.noise.sample(rng if rng is not None else self.rng, self.n_arms)
        c = emit_feedback(g, loss_row, action, xi)
        step = EnvironmentStep(
            round=self.t,
            graph=g,
            losses=loss_row.copy(),
            feedback=c,
            noise=xi,
            chosen=action,
            incurred=float(loss_row[action]),
        )
        self.t += 1
        return step.incurred, step
