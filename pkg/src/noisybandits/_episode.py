"""Fused per-round simulation loop.

One episode = T rounds of: rates -> action distribution -> inverse-CDF
arm draw -> feedback -> loss estimate -> cumulative update, with the
exploration mass Q_t recorded every round. All randomness (noise matrix,
sampling uniforms) is drawn up front by the caller, so the loop itself
is pure arithmetic and both backends replay identically.

The estimator is encoded in two matrices over the policy's view of the
graph: ``feat[j, i]`` is the denominator feature of weight s(j, i) and
``numfac[a, i]`` multiplies the feedback in the numerator when arm a was
played. See policies.estimator_matrices.
"""

from __future__ import annotations

import math

import numpy as np

from .backend import NUMBA_ENABLED

_STATUS_OK = 0
_STATUS_DEGENERATE = 1


def _episode_numpy(
    losses,
    env_w,
    numfac,
    feat,
    noise,
    arm_u,
    adaptive,
    eta0,
    gamma0,
    rate_r,
    arms,
    qs,
    etas,
    gammas,
    min_el,
):
    horizon, n = losses.shape
    cum = np.zeros(n)
    q_sum = 0.0
    log_n = math.log(n)
    scale = 2.0 * (1.0 + rate_r + rate_r * rate_r)
    for t in range(horizon):
        if adaptive:
            eta = math.sqrt(log_n / (scale * (n + q_sum)))
            gamma = rate_r * eta
        else:
            eta, gamma = eta0, gamma0
        w = np.exp(-eta * (cum - cum.min()))
        p = w / w.sum()
        cdf = np.cumsum(p)
        arm = min(int(np.searchsorted(cdf, arm_u[t], side="left")), n - 1)
        c = env_w[arm] * losses[t] + (1.0 - env_w[arm]) * noise[t]
        d = (p[:, None] * feat).sum(axis=0) + gamma
        if np.any(d <= 0.0):
            return _STATUS_DEGENERATE
        lhat = numfac[arm] * c / d
        q = float((p / d).sum())
        cum += lhat
        q_sum += q
        arms[t] = arm
        qs[t] = q
        etas[t] = eta
        gammas[t] = gamma
        min_el[t] = eta * lhat.min()
    return _STATUS_OK


if NUMBA_ENABLED:
    from numba import njit

    @njit(cache=True)
    def _episode_numba(
        losses,
        env_w,
        numfac,
        feat,
        noise,
        arm_u,
        adaptive,
        eta0,
        gamma0,
        rate_r,
        arms,
        qs,
        etas,
        gammas,
        min_el,
    ):  # pragma: no cover - exercised via wrapper
        horizon, n = losses.shape
        cum = np.zeros(n)
        p = np.empty(n)
        q_sum = 0.0
        log_n = math.log(n)
        scale = 2.0 * (1.0 + rate_r + rate_r * rate_r)
        for t in range(horizon):
            if adaptive:
                eta = math.sqrt(log_n / (scale * (n + q_sum)))
                gamma = rate_r * eta
            else:
                eta, gamma = eta0, gamma0
            m = cum[0]
            for i in range(1, n):
                if cum[i] < m:
                    m = cum[i]
            z = 0.0
            for i in range(n):
                w_i = math.exp(-eta * (cum[i] - m))
                p[i] = w_i
                z += w_i
            for i in range(n):
                p[i] /= z
            u = arm_u[t]
            acc = 0.0
            arm = n - 1
            for i in range(n - 1):
                acc += p[i]
                if u <= acc:
                    arm = i
                    break
            q = 0.0
            min_eta_lhat = np.inf
            for i in range(n):
                d = gamma
                for j in range(n):
                    d += p[j] * feat[j, i]
                if d <= 0.0:
                    return _STATUS_DEGENERATE
                c_i = env_w[arm, i] * losses[t, i] + (1.0 - env_w[arm, i]) * noise[t, i]
                lh = numfac[arm, i] * c_i / d
                q += p[i] / d
                cum[i] += lh
                el = eta * lh
                if el < min_eta_lhat:
                    min_eta_lhat = el
            q_sum += q
            arms[t] = arm
            qs[t] = q
            etas[t] = eta
            gammas[t] = gamma
            min_el[t] = min_eta_lhat
        return _STATUS_OK


def run_episode_core(
    losses: np.ndarray,
    env_w: np.ndarray,
    numfac: np.ndarray,
    feat: np.ndarray,
    noise: np.ndarray,
    arm_u: np.ndarray,
    adaptive: bool,
    eta0: float,
    gamma0: float,
    rate_r: float,
):
    """Run one episode; returns (arms, q, eta, gamma, min_eta_lhat).

    Raises DegenerateGraphError if an estimate denominator hits zero.
    """
    horizon, n = losses.shape
    arms = np.empty(horizon, dtype=np.int64)
    qs = np.empty(horizon)
    etas = np.empty(horizon)
    gammas = np.empty(horizon)
    min_el = np.empty(horizon)
    kernel = _episode_numba if NUMBA_ENABLED else _episode_numpy
    status = kernel(
        np.ascontiguousarray(losses, dtype=np.float64),
        np.ascontiguousarray(env_w, dtype=np.float64),
        np.ascontiguousarray(numfac, dtype=np.float64),
        np.ascontiguousarray(feat, dtype=np.float64),
        np.ascontiguousarray(noise, dtype=np.float64),
        np.ascontiguousarray(arm_u, dtype=np.float64),
        adaptive,
        eta0,
        gamma0,
        rate_r,
        arms,
        qs,
        etas,
        gammas,
        min_el,
    )
    if status == _STATUS_DEGENERATE:
        from .errors import DegenerateGraphError

        raise DegenerateGraphError("zero estimate denominator during episode")
    return arms, qs, etas, gammas, min_el
