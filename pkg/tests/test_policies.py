import math

import numpy as np
import pytest

from noisybandits.environment import emit_feedback
from noisybandits.errors import ProtocolViolationError
from noisybandits.graphs import ObservationGraph, gen_random_uniform, identity_graph
from noisybandits.policies import (
    AdaptiveRates,
    Estimator,
    ExpWeightsPolicy,
    StaticRates,
    action_distribution,
    adaptive_rates,
    compute_q,
    estimate,
    estimate_basic,
    estimate_truncated,
    estimate_weighted,
    estimator_matrices,
    ixb_transform,
    make_policy,
    sample_arm,
)


def random_instance(rng, n=None, zero_weights=False):
    """Random (p, graph, losses) with strictly positive p."""
    n = n or int(rng.integers(2, 9))
    lo = 0.0
    g = gen_random_uniform(n, lo, 1.0, rng)
    if zero_weights:
        w = g.weights.copy()
        mask = rng.random((n, n)) < 0.3
        np.fill_diagonal(mask, False)
        w[mask] = 0.0
        g = ObservationGraph(n, w)
    p = rng.dirichlet(np.ones(n) * 2.0)
    losses = rng.random(n)
    return p, g, losses


def analytic_expectation(p, g, losses, gamma, est: Estimator):
    """E over I ~ p of the estimate vector, at zero noise."""
    n = g.n
    out = np.zeros(n)
    for chosen in range(n):
        c = emit_feedback(g, losses, chosen, np.zeros(n))
        out += p[chosen] * estimate(p, g, chosen, c, gamma, est)
    return out


class TestActionDistribution:
    def test_uniform_at_start(self):
        p = action_distribution(np.zeros(7), 0.3)
        assert np.allclose(p, 1.0 / 7.0)

    def test_two_arm_closed_form(self):
        p = action_distribution(np.array([0.0, math.log(3.0)]), 1.0)
        assert np.allclose(p, [0.75, 0.25], atol=1e-14)

    def test_shift_invariance(self, rng):
        cum = rng.normal(0, 5, size=10)
        p1 = action_distribution(cum, 0.2)
        p2 = action_distribution(cum + 1e6, 0.2)
        assert np.allclose(p1, p2, atol=1e-12)

    def test_simplex_invariant(self, rng):
        for _ in range(100):
            cum = rng.normal(0, 50, size=int(rng.integers(2, 20)))
            p = action_distribution(cum, float(rng.uniform(0.001, 2.0)))
            assert abs(p.sum() - 1.0) <= 1e-12
            assert np.all(p > 0.0)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            action_distribution(np.array([0.0, np.inf]), 0.1)
        with pytest.raises(ValueError):
            action_distribution(np.zeros(3), 0.0)

    def test_large_magnitudes_stay_finite(self):
        p = action_distribution(np.array([0.0, 1e5, 2e5]), 0.01)
        assert np.isfinite(p).all() and p[0] > 0.999


class TestSampling:
    def test_inverse_cdf_is_deterministic_given_stream(self):
        p = np.array([0.2, 0.5, 0.3])
        a = [sample_arm(p, np.random.default_rng(4)) for _ in range(3)]
        assert a[0] == a[1] == a[2]

    def test_frequencies_roughly_match(self, rng):
        p = np.array([0.1, 0.6, 0.3])
        draws = np.array([sample_arm(p, rng) for _ in range(20000)])
        freq = np.bincount(draws, minlength=3) / draws.size
        assert np.allclose(freq, p, atol=0.02)


class TestEstimators:
    def test_single_arm_identity(self):
        g = identity_graph(1)
        p = np.array([1.0])
        c = np.array([0.7])
        assert estimate_basic(p, g, 0, c, 0.0)[0] == pytest.approx(0.7)
        assert estimate_weighted(p, g, 0, c, 0.0)[0] == pytest.approx(0.7)

    def test_weighted_two_arm_worked_example(self):
        g = ObservationGraph(2, np.array([[1.0, 0.5], [0.0, 1.0]]))
        p = np.array([0.5, 0.5])
        losses = np.array([0.0, 1.0])
        e0 = estimate_weighted(p, g, 0, g.weights[0] * losses, 0.0)
        e1 = estimate_weighted(p, g, 1, g.weights[1] * losses, 0.0)
        assert e0[1] == pytest.approx(0.4)
        assert e1[1] == pytest.approx(1.6)
        assert 0.5 * e0[1] + 0.5 * e1[1] == pytest.approx(1.0)

    def test_truncated_at_zero_equals_basic(self, rng):
        for _ in range(50):
            p, g, losses = random_instance(rng)
            chosen = int(rng.integers(g.n))
            c = emit_feedback(g, losses, chosen, rng.uniform(-1, 1, g.n))
            basic = estimate_basic(p, g, chosen, c, 0.05)
            trunc = estimate_truncated(p, g, chosen, c, 0.05, 0.0)
            assert np.allclose(basic, trunc, atol=1e-15)

    def test_numerator_zero_below_threshold(self, rng):
        p, g, losses = random_instance(rng, n=6)
        eps = 0.6
        chosen = 2
        c = emit_feedback(g, losses, chosen, rng.uniform(-1, 1, 6))
        est = estimate_truncated(p, g, chosen, c, 0.1, eps)
        for i in range(6):
            if g.weights[chosen, i] < eps:
                assert est[i] == 0.0

    def test_reduction_on_binary_graphs(self, rng):
        # with zero noise and gamma=0 the three estimators coincide
        for _ in range(50):
            n = int(rng.integers(2, 9))
            w = (rng.random((n, n)) < 0.5).astype(float)
            np.fill_diagonal(w, 1.0)
            g = ObservationGraph(n, w)
            p = rng.dirichlet(np.ones(n))
            losses = rng.random(n)
            chosen = int(rng.integers(n))
            c = emit_feedback(g, losses, chosen, np.zeros(n))
            e_b = estimate_basic(p, g, chosen, c, 0.0)
            e_t = estimate_truncated(p, g, chosen, c, 0.0, 1.0)
            e_w = estimate_weighted(p, g, chosen, c, 0.0, 1.0)
            assert np.allclose(e_b, e_t, atol=1e-14)
            assert np.allclose(e_b, e_w, atol=1e-14)

    def test_unbiased_at_gamma_zero(self, rng):
        for _ in range(500):
            p, g, losses = random_instance(rng)
            for est in (
                Estimator("basic"),
                Estimator("truncated", eps=float(rng.uniform(0, 1))),
                Estimator("weighted", delta=float(rng.uniform(1, 3))),
            ):
                exp = analytic_expectation(p, g, losses, 0.0, est)
                assert np.allclose(exp, losses, atol=1e-10)

    def test_downward_bias_at_positive_gamma(self, rng):
        for _ in range(100):
            p, g, losses = random_instance(rng)
            for gamma in (0.01, 0.1):
                for est in (
                    Estimator("basic"),
                    Estimator("truncated", eps=0.4),
                    Estimator("weighted"),
                ):
                    exp = analytic_expectation(p, g, losses, gamma, est)
                    assert np.all(exp <= losses + 1e-12)

    def test_second_moment_ceiling(self, rng):
        # E[sum_i p_i lhat_i^2] <= (1+R^2) Q (weighted) and (1+R^2)/eps Q' (truncated)
        r = 1.0
        for _ in range(200):
            p, g, losses = random_instance(rng)
            n = g.n
            gamma = float(rng.uniform(0.0, 0.2))
            for est in (
                Estimator("weighted", delta=float(rng.choice([1.0, 1.5, 2.0]))),
                Estimator("truncated", eps=float(rng.uniform(0.05, 1.0))),
            ):
                second = 0.0
                for chosen in range(n):
                    acc = np.zeros(n)
                    for sign in (-1.0, 1.0):  # rademacher noise, E[xi^2] = R^2
                        c = emit_feedback(g, losses, chosen, np.full(n, sign * r))
                        lhat = estimate(p, g, chosen, c, gamma, est)
                        acc += 0.5 * lhat**2
                    second += p[chosen] * float((p * acc).sum())
                q = compute_q(p, g, gamma, est)
                ceiling = (1.0 + r * r) * q
                if est.kind == "truncated":
                    ceiling /= est.eps
                assert second <= ceiling + 1e-9

    def test_rejects_bad_params(self, rng):
        p, g, losses = random_instance(rng, n=3)
        c = losses
        with pytest.raises(ValueError):
            estimate_basic(p, g, 0, c, -0.1)
        with pytest.raises(ValueError):
            estimate_weighted(p, g, 0, c, 0.0, delta=0.5)
        with pytest.raises(ValueError):
            estimate_truncated(p, g, 0, c, 0.0, eps=1.5)
        with pytest.raises(ValueError):
            Estimator("weighted", delta=0.9)
        with pytest.raises(ValueError):
            Estimator("magic")


class TestComputeQ:
    def test_all_ones_graph(self, rng):
        n = 6
        g = ObservationGraph(n, np.ones((n, n)))
        p = rng.dirichlet(np.ones(n))
        assert compute_q(p, g, 0.0, Estimator("weighted")) == pytest.approx(1.0)

    def test_bandit_graph_gives_n(self, rng):
        n = 9
        g = identity_graph(n)
        p = rng.dirichlet(np.ones(n))
        for est in (Estimator("weighted"), Estimator("basic"), Estimator("truncated", eps=1.0)):
            assert compute_q(p, g, 0.0, est) == pytest.approx(float(n))

    def test_q_at_most_n_with_unit_diagonal(self, rng):
        for _ in range(100):
            p, g, _ = random_instance(rng)
            q = compute_q(p, g, float(rng.uniform(0, 0.5)), Estimator("weighted"))
            assert q <= g.n + 1e-12

    def test_matches_estimator_matrices(self, rng):
        p, g, _ = random_instance(rng, n=7)
        for est in (Estimator("basic"), Estimator("truncated", eps=0.3), Estimator("weighted", delta=2.0)):
            _, feat = estimator_matrices(g.weights, est)
            d = (p[:, None] * feat).sum(axis=0) + 0.05
            assert compute_q(p, g, 0.05, est) == pytest.approx(float((p / d).sum()))


class TestRates:
    def test_first_round_reference_value(self):
        eta, gamma = adaptive_rates([], 25, 1.0)
        assert eta == pytest.approx(math.sqrt(math.log(25) / 150.0), abs=1e-15)
        assert gamma == eta

    def test_zero_noise_bound_zeroes_gamma(self):
        _, gamma = adaptive_rates([1.0, 2.0], 10, 0.0)
        assert gamma == 0.0

    def test_monotone_nonincreasing(self, rng):
        qs = list(rng.uniform(0, 10, size=100))
        etas = [adaptive_rates(qs[:t], 12, 1.0)[0] for t in range(101)]
        assert all(a >= b for a, b in zip(etas, etas[1:]))

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ValueError):
            adaptive_rates([], 1, 1.0)
        with pytest.raises(ValueError):
            adaptive_rates([-0.5], 5, 1.0)


class TestIxbTransform:
    def test_binary_graph_fixed_point(self, rng):
        n = 6
        w = (rng.random((n, n)) < 0.4).astype(float)
        np.fill_diagonal(w, 1.0)
        g = ObservationGraph(n, w)
        for eps in (0.2, 0.7, 1.0):
            assert np.array_equal(ixb_transform(g, eps).weights, w)

    def test_grid_at_one_keeps_close_pairs(self):
        from noisybandits.graphs import gen_grid_geometric

        g = gen_grid_geometric(5, "min_3_over_d2")
        b = ixb_transform(g, 1.0)
        assert np.array_equal(b.weights, (g.weights >= 1.0).astype(float))

    def test_zero_threshold_promotes_positive_weights(self, rng):
        p, g, _ = random_instance(rng, zero_weights=True)
        b = ixb_transform(g, 0.0)
        assert np.array_equal(b.weights, (g.weights > 0).astype(float))

    def test_rejects_out_of_range(self, rng):
        _, g, _ = random_instance(rng)
        with pytest.raises(ValueError):
            ixb_transform(g, 1.0001)


class TestPolicyProtocol:
    def test_first_round_uniform(self, rng):
        for name in ("exp3", "exp3-wix"):
            pol = make_policy(name, 6, eps=0.5)
            state = pol.start()
            _, p = pol.step(state, rng)
            assert np.allclose(p, 1.0 / 6.0)

    def test_step_twice_raises(self, rng):
        pol = make_policy("exp3-wix", 4)
        state = pol.start()
        pol.step(state, rng)
        with pytest.raises(ProtocolViolationError):
            pol.step(state, rng)

    def test_feedback_before_play_raises(self, rng):
        pol = make_policy("exp3-wix", 4)
        state = pol.start()
        with pytest.raises(ProtocolViolationError):
            pol.ingest(state, np.zeros(4), identity_graph(4))

    def test_deterministic_replay(self):
        g = gen_random_uniform(5, 0.1, 1.0, np.random.default_rng(11))
        runs = []
        for _ in range(2):
            pol = make_policy("exp3-wix", 5)
            state = pol.start()
            rng = np.random.default_rng(77)
            noise_rng = np.random.default_rng(78)
            arms = []
            for t in range(30):
                arm, _ = pol.step(state, rng)
                losses = np.full(5, 0.3)
                c = emit_feedback(g, losses, arm, noise_rng.uniform(-1, 1, 5))
                pol.ingest(state, c, g)
                arms.append(arm)
            runs.append((arms, state.cum_est.copy(), list(state.q_history)))
        assert runs[0][0] == runs[1][0]
        assert np.array_equal(runs[0][1], runs[1][1])
        assert runs[0][2] == runs[1][2]

    def test_adaptive_state_bookkeeping(self, rng):
        pol = make_policy("exp3-wix", 5)
        state = pol.start()
        g = gen_random_uniform(5, 0.3, 1.0, rng)
        etas = []
        for t in range(20):
            arm, _ = pol.step(state, rng)
            etas.append(state.eta)
            assert state.gamma == pytest.approx(state.eta)  # R = 1
            c = emit_feedback(g, np.full(5, 0.5), arm, rng.uniform(-1, 1, 5))
            pol.ingest(state, c, g)
        assert state.t == 20
        assert len(state.q_history) == 20
        assert all(a >= b for a, b in zip(etas, etas[1:]))

    def test_static_safety_warning(self):
        with pytest.warns(RuntimeWarning):
            make_policy("exp3-wix", 5, rates=StaticRates(eta=0.1, gamma=0.0), noise_bound=1.0)

    def test_static_safe_pair_silent(self, recwarn):
        make_policy("exp3-wix", 5, rates=StaticRates(eta=0.1, gamma=0.1), noise_bound=1.0)
        assert not [w for w in recwarn.list if issubclass(w.category, RuntimeWarning)]

    def test_identity_mode_ignores_graph(self, rng):
        pol = make_policy("exp3", 4)
        state = pol.start()
        arm, p = pol.step(state, rng)
        g = gen_random_uniform(4, 0.5, 1.0, rng)
        c = emit_feedback(g, np.array([0.1, 0.9, 0.5, 0.4]), arm, np.zeros(4))
        lhat = pol.ingest(state, c, g)
        # only the played arm's estimate can be nonzero
        mask = np.arange(4) != arm
        assert np.all(lhat[mask] == 0.0)
        assert state.q_history[-1] == pytest.approx(
            float((p / (p + state.gamma)).sum())
        )

    def test_presets_require_eps(self):
        with pytest.raises(ValueError):
            make_policy("exp3-ixb", 4)
        with pytest.raises(ValueError):
            make_policy("exp3-ixt", 4)
        with pytest.raises(ValueError):
            make_policy("exp5", 4)
