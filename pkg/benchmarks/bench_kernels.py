"""Timing comparison of the numba kernels against the numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--episodes 20] [--mis-graphs 40]

Covers the two hot paths: the fused episode loop (adaptive weighted
policy on the 5x5 grid setup) and the independent-set branch-and-bound
(random binary digraphs, n = 40). Forcing the fallback everywhere:
NOISYBANDITS_NUMBA=0 python benchmarks/bench_kernels.py (the numba
column is then skipped).
"""

import argparse
import time

import numpy as np

from noisybandits._episode import _episode_numpy
from noisybandits._mis import _mis_core_python
from noisybandits.backend import NUMBA_ENABLED
from noisybandits.graphs import gen_grid_geometric
from noisybandits.harness import (
    _DOMAIN_NOISE,
    _DOMAIN_SAMPLING,
    RunConfig,
    build_policy,
    resolve_graph,
    resolve_losses,
    resolve_noise,
    seed_stream,
)
from noisybandits.policies import estimator_matrices


def episode_inputs(seed):
    cfg = RunConfig.from_dict(
        {
            "n_arms": 25,
            "horizon": 5000,
            "policy": {"name": "exp3-wix", "rates": {"mode": "adaptive"}},
            "graph": {"kind": "grid", "side": 5, "weight_rule": "min_3_over_d2"},
            "losses": {"kind": "random_walks", "n_walks": 20, "step_sigma": 0.05},
            "noise": {"kind": "uniform_symmetric", "bound": 1.0},
            "seed": seed,
            "repetitions": 1,
        }
    )
    graph = resolve_graph(cfg)
    losses = resolve_losses(cfg)
    policy = build_policy(cfg)
    noise = resolve_noise(cfg).sample(
        seed_stream(cfg.seed, _DOMAIN_NOISE, 0), (cfg.horizon, cfg.n_arms)
    )
    arm_u = seed_stream(cfg.seed, _DOMAIN_SAMPLING, 0).random(cfg.horizon)
    numfac, feat = estimator_matrices(graph.weights, policy.estimator)
    return (
        losses.values, graph.weights, numfac, feat, noise, arm_u,
        True, 0.0, 0.0, 1.0,
    )


def out_buffers(horizon):
    return [np.empty(horizon, dtype=np.int64)] + [np.empty(horizon) for _ in range(4)]


def bench_episode(n_episodes):
    results = {}
    variants = [("numpy", _episode_numpy)]
    if NUMBA_ENABLED:
        from noisybandits._episode import _episode_numba

        _episode_numba(*episode_inputs(0), *out_buffers(5000))  # compile
        variants.append(("numba", _episode_numba))
    for name, kernel in variants:
        inputs = [episode_inputs(s) for s in range(n_episodes)]
        start = time.perf_counter()
        for args in inputs:
            kernel(*args, *out_buffers(5000))
        results[name] = (time.perf_counter() - start) / n_episodes
    return results


def mis_instances(n_graphs, n=50, seed=7):
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(n_graphs):
        # sparse symmetric graphs make the search branch hardest
        a = rng.random((n, n)) < rng.uniform(0.06, 0.14)
        a |= a.T
        np.fill_diagonal(a, False)
        masks = [int(sum(1 << int(j) for j in np.flatnonzero(a[i]))) for i in range(n)]
        instances.append((masks, n))
    return instances


def bench_mis(n_graphs):
    instances = mis_instances(n_graphs)
    results = {}
    start = time.perf_counter()
    sizes_py = [_mis_core_python(m, n, 10**8, 0)[0] for m, n in instances]
    results["numpy"] = (time.perf_counter() - start) / n_graphs
    if NUMBA_ENABLED:
        from noisybandits._mis import _mis_core_numba

        arrays = [(np.array(m, dtype=np.int64), n) for m, n in instances]
        _mis_core_numba(arrays[0][0], arrays[0][1], 10**8, 0)  # compile
        start = time.perf_counter()
        sizes_nb = [int(_mis_core_numba(a, n, 10**8, 0)[0]) for a, n in arrays]
        results["numba"] = (time.perf_counter() - start) / n_graphs
        assert sizes_py == sizes_nb
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--episodes", type=int, default=20)
    parser.add_argument("--mis-graphs", type=int, default=40)
    args = parser.parse_args()

    print(f"numba available: {NUMBA_ENABLED}")
    print()
    print(f"{'kernel':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    ep = bench_episode(args.episodes)
    mis = bench_mis(args.mis_graphs)
    for label, res in (("episode (T=5000, N=25)", ep), ("MIS B&B (n=50)", mis)):
        np_ms = res["numpy"] * 1e3
        if "numba" in res:
            nb_ms = res["numba"] * 1e3
            print(f"{label:<28}{np_ms:>10.2f}ms{nb_ms:>10.2f}ms{np_ms / nb_ms:>9.1f}x")
        else:
            print(f"{label:<28}{np_ms:>10.2f}ms{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
