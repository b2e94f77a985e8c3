"""Seeded experiment runner: episodes, batches, sweeps, and CSV emission.

Reproducibility contract: a master seed is split into independent streams
with ``numpy.random.SeedSequence(master, spawn_key=...)``. Stream keys are
(0,) for loss generation, (1,) for graph generation, and (2, rep) /
(3, rep) for the noise and arm-sampling streams of repetition ``rep``.
The loss sequence and graph are generated once per experiment and shared
by all repetitions; repetitions differ only through their noise and
sampling streams. Reported regret is realized regret: the learner's
cumulative loss minus the best fixed arm's cumulative loss on the same
sequence (the expected-regret quantity is approximated by repetition
means, as recorded in meta.json).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._episode import run_episode_core
from .backend import backend_name
from .environment import LossSequence, NoiseModel, gen_random_walk_losses
from .errors import BudgetExceededError, ConfigError
from .graphs import (
    DEFAULT_NODE_BUDGET,
    ObservationGraph,
    effective_independence_number,
    gen_grid_geometric,
    gen_random_uniform,
    identity_graph,
)
from .policies import (
    AdaptiveRates,
    ExpWeightsPolicy,
    StaticRates,
    estimator_matrices,
    make_policy,
)

_DOMAIN_LOSSES = 0
_DOMAIN_GRAPH = 1
_DOMAIN_NOISE = 2
_DOMAIN_SAMPLING = 3

# per-policy static learning-rate defaults when eta is omitted
STATIC_ETA_DEFAULTS = {"exp3": 0.01, "exp3-ixb": 0.1, "exp3-ixt": 0.1, "exp3-wix": 0.1}

TRACE_COLUMNS = (
    "round",
    "arm",
    "loss",
    "cum_regret",
    "Q",
    "eta",
    "gamma",
    "cum_loss",
    "best_arm_cum_loss",
    "min_eta_lhat",
)


def seed_stream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def _require_keys(d: dict, allowed: set, required: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} fields: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing {where} fields: {sorted(missing)}")


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment description (see config JSON schema in README)."""

    n_arms: int
    horizon: int
    policy: dict
    graph: dict
    losses: dict
    noise: dict
    seed: int
    repetitions: int

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        _require_keys(
            d,
            {"n_arms", "horizon", "policy", "graph", "losses", "noise", "seed", "repetitions"},
            {"n_arms", "horizon", "policy", "graph", "losses", "seed"},
            "config",
        )
        cfg = cls(
            n_arms=int(d["n_arms"]),
            horizon=int(d["horizon"]),
            policy=dict(d["policy"]),
            graph=dict(d["graph"]),
            losses=dict(d["losses"]),
            noise=dict(d.get("noise", {"kind": "uniform_symmetric", "bound": 1.0})),
            seed=int(d["seed"]),
            repetitions=int(d.get("repetitions", 1)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "n_arms": self.n_arms,
            "horizon": self.horizon,
            "policy": self.policy,
            "graph": self.graph,
            "losses": self.losses,
            "noise": self.noise,
            "seed": self.seed,
            "repetitions": self.repetitions,
        }

    def validate(self):
        if self.n_arms < 2:
            raise ConfigError("n_arms must be >= 2")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        _require_keys(
            self.policy,
            {"name", "eps", "delta", "rates"},
            {"name"},
            "policy",
        )
        rates = self.policy.get("rates", {"mode": "adaptive"})
        _require_keys(rates, {"mode", "eta", "gamma"}, {"mode"}, "rates")
        if rates["mode"] not in ("adaptive", "static"):
            raise ConfigError(f"unknown rates mode {rates['mode']!r}")
        kind = self.graph.get("kind")
        allowed = {
            "grid": ({"kind", "side", "weight_rule"}, {"kind", "side", "weight_rule"}),
            "uniform": ({"kind", "n", "lo", "hi"}, {"kind", "n", "lo", "hi"}),
            "identity": ({"kind", "n"}, {"kind", "n"}),
            "file": ({"kind", "path"}, {"kind", "path"}),
        }
        if kind not in allowed:
            raise ConfigError(f"unknown graph kind {kind!r}")
        _require_keys(self.graph, *allowed[kind], "graph")
        lkind = self.losses.get("kind")
        lallowed = {
            "random_walks": (
                {"kind", "n_walks", "step_sigma", "interleaving"},
                {"kind", "n_walks", "step_sigma"},
            ),
            "file": ({"kind", "path"}, {"kind", "path"}),
        }
        if lkind not in lallowed:
            raise ConfigError(f"unknown losses kind {lkind!r}")
        _require_keys(self.losses, *lallowed[lkind], "losses")
        _require_keys(self.noise, {"kind", "bound"}, set(), "noise")
        NoiseModel(bound=float(self.noise.get("bound", 1.0)), kind=self.noise.get("kind", "uniform_symmetric"))


def resolve_noise(cfg: RunConfig) -> NoiseModel:
    return NoiseModel(
        bound=float(cfg.noise.get("bound", 1.0)),
        kind=cfg.noise.get("kind", "uniform_symmetric"),
    )


def resolve_graph(cfg: RunConfig) -> ObservationGraph:
    spec = cfg.graph
    kind = spec["kind"]
    if kind == "grid":
        g = gen_grid_geometric(int(spec["side"]), spec["weight_rule"])
    elif kind == "uniform":
        g = gen_random_uniform(
            int(spec["n"]), float(spec["lo"]), float(spec["hi"]),
            seed_stream(cfg.seed, _DOMAIN_GRAPH),
        )
    elif kind == "identity":
        g = identity_graph(int(spec["n"]))
    else:
        g = ObservationGraph.from_json(Path(spec["path"]).read_text())
    if g.n != cfg.n_arms:
        raise ConfigError(f"graph has {g.n} nodes but n_arms={cfg.n_arms}")
    return g


def resolve_losses(cfg: RunConfig) -> LossSequence:
    spec = cfg.losses
    if spec["kind"] == "random_walks":
        seq = gen_random_walk_losses(
            cfg.n_arms,
            int(spec["n_walks"]),
            cfg.horizon,
            float(spec["step_sigma"]),
            seed_stream(cfg.seed, _DOMAIN_LOSSES),
            interleaving=spec.get("interleaving", "per_arm"),
        )
    else:
        seq = LossSequence.from_csv(Path(spec["path"]).read_text())
    if seq.n_arms != cfg.n_arms or seq.horizon != cfg.horizon:
        raise ConfigError(
            f"loss sequence is {seq.horizon}x{seq.n_arms}, "
            f"config wants {cfg.horizon}x{cfg.n_arms}"
        )
    return seq


def resolve_rates(rates_spec: dict, policy_name: str, noise_bound: float):
    if rates_spec.get("mode", "adaptive") == "adaptive":
        return AdaptiveRates(noise_bound)
    eta = rates_spec.get("eta")
    if eta is None:
        eta = STATIC_ETA_DEFAULTS[policy_name]
    return StaticRates(eta=float(eta), gamma=float(rates_spec.get("gamma", 0.0)))


def build_policy(cfg: RunConfig, name: str | None = None, eps=None) -> ExpWeightsPolicy:
    spec = cfg.policy
    name = name or spec["name"]
    noise_bound = float(cfg.noise.get("bound", 1.0))
    rates = resolve_rates(spec.get("rates", {"mode": "adaptive"}), name, noise_bound)
    if eps is None:
        eps = spec.get("eps")
    return make_policy(
        name,
        cfg.n_arms,
        eps=eps,
        delta=float(spec.get("delta", 1.0)),
        rates=rates,
        noise_bound=noise_bound,
    )


@dataclass
class RegretTrace:
    """Per-round record of one episode plus its regret accounting."""

    arms: np.ndarray
    incurred: np.ndarray
    cum_loss: np.ndarray
    best_arm_cum_loss: np.ndarray
    cum_regret: np.ndarray
    q: np.ndarray
    eta: np.ndarray
    gamma: np.ndarray
    min_eta_lhat: np.ndarray

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for t in range(self.arms.shape[0]):
            writer.writerow(
                [
                    t + 1,
                    int(self.arms[t]),
                    repr(float(self.incurred[t])),
                    repr(float(self.cum_regret[t])),
                    repr(float(self.q[t])),
                    repr(float(self.eta[t])),
                    repr(float(self.gamma[t])),
                    repr(float(self.cum_loss[t])),
                    repr(float(self.best_arm_cum_loss[t])),
                    repr(float(self.min_eta_lhat[t])),
                ]
            )
        return buf.getvalue()


@dataclass
class AggregateResult:
    """Repetition statistics for one configuration."""

    mean_regret: float
    std_regret: float
    n_reps: int
    final_regrets: list
    mean_curve: np.ndarray = field(default_factory=lambda: np.empty(0))


def run_episode(
    cfg: RunConfig,
    rep: int = 0,
    graph: ObservationGraph | None = None,
    losses: LossSequence | None = None,
    policy: ExpWeightsPolicy | None = None,
) -> RegretTrace:
    """One seeded episode of the full protocol, via the fused kernel."""
    graph = resolve_graph(cfg) if graph is None else graph
    losses = resolve_losses(cfg) if losses is None else losses
    policy = build_policy(cfg) if policy is None else policy
    noise_model = resolve_noise(cfg)

    noise = noise_model.sample(
        seed_stream(cfg.seed, _DOMAIN_NOISE, rep), (cfg.horizon, cfg.n_arms)
    )
    arm_u = seed_stream(cfg.seed, _DOMAIN_SAMPLING, rep).random(cfg.horizon)

    eff_w = policy.effective_graph(graph).weights
    numfac, feat = estimator_matrices(eff_w, policy.estimator)
    if isinstance(policy.rates, AdaptiveRates):
        adaptive, eta0, gamma0, rate_r = True, 0.0, 0.0, policy.rates.noise_bound
    else:
        adaptive, eta0, gamma0 = False, policy.rates.eta, policy.rates.gamma
        rate_r = policy.noise_bound

    arms, qs, etas, gammas, min_el = run_episode_core(
        losses.values, graph.weights, numfac, feat, noise, arm_u,
        adaptive, eta0, gamma0, rate_r,
    )
    incurred = losses.values[np.arange(cfg.horizon), arms]
    cum_loss = np.cumsum(incurred)
    best_arm_cum = np.cumsum(losses.values, axis=0).min(axis=1)
    return RegretTrace(
        arms=arms,
        incurred=incurred,
        cum_loss=cum_loss,
        best_arm_cum_loss=best_arm_cum,
        cum_regret=cum_loss - best_arm_cum,
        q=qs,
        eta=etas,
        gamma=gammas,
        min_eta_lhat=min_el,
    )


def run_batch(cfg: RunConfig, n_reps: int | None = None):
    """Repetitions over a single loss sequence; returns (AggregateResult, traces)."""
    n_reps = cfg.repetitions if n_reps is None else n_reps
    if n_reps < 1:
        raise ConfigError("need at least one repetition")
    graph = resolve_graph(cfg)
    losses = resolve_losses(cfg)
    policy = build_policy(cfg)
    traces = [
        run_episode(cfg, rep, graph=graph, losses=losses, policy=policy)
        for rep in range(n_reps)
    ]
    return aggregate(traces), traces


def aggregate(traces: list[RegretTrace]) -> AggregateResult:
    finals = [t.final_regret for t in traces]
    mean = float(np.mean(finals))
    std = float(np.std(finals, ddof=1)) if len(finals) > 1 else 0.0
    curve = np.mean([t.cum_regret for t in traces], axis=0)
    return AggregateResult(
        mean_regret=mean,
        std_regret=std,
        n_reps=len(finals),
        final_regrets=finals,
        mean_curve=curve,
    )


def sweep_epsilon(cfg: RunConfig, eps_list, n_reps: int | None = None) -> list[dict]:
    """IXt and IXb across the threshold grid, WIX and Exp3 as references.

    Every cell shares the experiment's loss sequence, graph and per-rep
    noise/sampling streams, so comparisons are paired by seed. Returns one
    row per (policy, eps) with the aggregate and per-rep regrets.
    """
    eps_list = [float(e) for e in eps_list]
    for e in eps_list:
        if not 0.0 <= e <= 1.0:
            raise ConfigError(f"sweep eps {e} outside [0, 1]")
    n_reps = cfg.repetitions if n_reps is None else n_reps
    graph = resolve_graph(cfg)
    losses = resolve_losses(cfg)

    rows = []

    def run_cell(name, eps=None):
        policy = build_policy(cfg, name=name, eps=eps)
        traces = [
            run_episode(cfg, rep, graph=graph, losses=losses, policy=policy)
            for rep in range(n_reps)
        ]
        agg = aggregate(traces)
        key = name if eps is None else f"{name}@eps={eps:g}"
        rows.append(
            {"config_key": key, "policy": name, "eps": eps, "aggregate": agg}
        )

    run_cell("exp3-wix")
    run_cell("exp3")
    for eps in eps_list:
        run_cell("exp3-ixt", eps)
        run_cell("exp3-ixb", eps)
    return rows


def random_alpha_experiment(
    sizes,
    lo: float,
    hi: float,
    n_graphs_per_size: int,
    seed: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    label: str | None = None,
) -> list[dict]:
    """Sample random graphs and tabulate their effective independence numbers.

    Budget-exceeded searches are kept as rows with status 'budget-exceeded'.
    """
    label = label if label is not None else f"U({lo:g},{hi:g})"
    rows = []
    for n in sizes:
        for idx in range(n_graphs_per_size):
            g = gen_random_uniform(
                int(n), lo, hi, seed_stream(seed, _DOMAIN_GRAPH, int(n), idx)
            )
            try:
                res = effective_independence_number(g, node_budget)
                rows.append(
                    {
                        "distribution": label,
                        "n": int(n),
                        "seed": idx,
                        "alpha_star": res.alpha_star,
                        "eps_star": res.epsilon_star,
                        "status": "ok",
                    }
                )
            except BudgetExceededError:
                rows.append(
                    {
                        "distribution": label,
                        "n": int(n),
                        "seed": idx,
                        "alpha_star": float("nan"),
                        "eps_star": float("nan"),
                        "status": "budget-exceeded",
                    }
                )
    return rows


def theoretical_bound(trace: RegretTrace, n_arms: int, noise_bound: float) -> float:
    """Closed-form regret ceiling from the realized Q values of one run."""
    if trace.q is None or trace.q.size == 0:
        raise ValueError("trace carries no Q history")
    r = noise_bound
    return 2.0 * np.sqrt(
        2.0 * (1.0 + r + r * r) * (n_arms + float(trace.q.sum())) * np.log(n_arms)
    )


# ---------------------------------------------------------------------------
# file emission


def write_trace_csv(trace: RegretTrace, path):
    Path(path).write_text(trace.to_csv())


def write_aggregate_csv(rows: list[dict], path):
    """Long-format per-repetition rows: config_key, policy, eps, rep, final_regret."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["config_key", "policy", "eps", "rep", "final_regret"])
    for row in rows:
        eps = "" if row["eps"] is None else repr(float(row["eps"]))
        for rep, final in enumerate(row["aggregate"].final_regrets):
            writer.writerow(
                [row["config_key"], row["policy"], eps, rep, repr(float(final))]
            )
    Path(path).write_text(buf.getvalue())


def write_summary_csv(rows: list[dict], path):
    """One row per configuration: mean/std of the final regret."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["config_key", "policy", "eps", "mean_regret", "std_regret", "n_reps"])
    for row in rows:
        agg = row["aggregate"]
        eps = "" if row["eps"] is None else repr(float(row["eps"]))
        writer.writerow(
            [
                row["config_key"],
                row["policy"],
                eps,
                repr(float(agg.mean_regret)),
                repr(float(agg.std_regret)),
                agg.n_reps,
            ]
        )
    Path(path).write_text(buf.getvalue())


def write_alpha_scatter_csv(rows: list[dict], path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["distribution", "n", "seed", "alpha_star", "eps_star", "status"])
    for row in rows:
        writer.writerow(
            [
                row["distribution"],
                row["n"],
                row["seed"],
                repr(float(row["alpha_star"])),
                repr(float(row["eps_star"])),
                row["status"],
            ]
        )
    Path(path).write_text(buf.getvalue())


def write_meta(cfg: RunConfig, path, **extra):
    import numpy

    meta = {
        "config": cfg.to_dict(),
        "package_version": __version__,
        "numpy_version": numpy.__version__,
        "backend": backend_name(),
        "regret_definition": (
            "realized: learner cumulative loss minus best fixed arm's "
            "cumulative loss on the same sequence"
        ),
    }
    meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
