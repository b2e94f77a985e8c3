import json
import math

import numpy as np
import pytest

from noisybandits.graphs import (
    BinaryDigraph,
    ObservationGraph,
    effective_independence_number,
    gen_grid_geometric,
    gen_random_uniform,
    identity_graph,
    independence_number,
    q_upper_bound,
    threshold,
)

from conftest import mis_by_enumeration


def random_weighted_graph(n, rng, values=None):
    if values is None:
        w = rng.random((n, n))
    else:
        w = rng.choice(values, size=(n, n))
    np.fill_diagonal(w, 1.0)
    return ObservationGraph(n, w)


class TestObservationGraph:
    def test_rejects_out_of_range_weights(self):
        with pytest.raises(ValueError):
            ObservationGraph(2, np.array([[1.0, 1.2], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            ObservationGraph(2, np.array([[1.0, -0.1], [0.0, 1.0]]))

    def test_from_weights_enforces_unit_diagonal(self):
        w = np.array([[0.5, 0.2], [0.1, 1.0]])
        with pytest.raises(ValueError):
            ObservationGraph.from_weights(w)
        g = ObservationGraph.from_weights(w, require_unit_diagonal=False)
        assert g.weights[0, 0] == 0.5

    def test_json_round_trip(self, rng):
        g = gen_random_uniform(6, 0.2, 0.9, rng)
        g2 = ObservationGraph.from_json(g.to_json())
        assert np.array_equal(g.weights, g2.weights)

    def test_json_rejects_bad_payloads(self):
        with pytest.raises(ValueError):
            ObservationGraph.from_json(json.dumps({"n": 2, "weights": [1, 0, 1]}))
        with pytest.raises(ValueError):
            ObservationGraph.from_json(json.dumps({"n": 2, "weights": [1, 2.0, 0, 1]}))
        with pytest.raises(ValueError):
            ObservationGraph.from_json(json.dumps({"n": 2, "weights": [1, 0, 0, 1], "x": 1}))


class TestThreshold:
    def test_two_node_example(self):
        g = ObservationGraph(2, np.array([[1.0, 0.7], [0.3, 1.0]]))
        assert threshold(g, 0.5).arc_set() == {(0, 1)}

    def test_above_max_weight_empties(self, rng):
        g = random_weighted_graph(6, rng)
        off = g.weights[~np.eye(6, dtype=bool)]
        eps = min(float(off.max()) + 1e-9, 1.0)
        assert threshold(g, eps).arc_set() == set() or float(off.max()) >= eps

    def test_binary_graph_identity_at_one(self, rng):
        g = random_weighted_graph(7, rng, values=np.array([0.0, 1.0]))
        arcs = threshold(g, 1.0).arc_set()
        expected = {
            (i, j)
            for i in range(7)
            for j in range(7)
            if i != j and g.weights[i, j] == 1.0
        }
        assert arcs == expected

    def test_rejects_bad_eps(self, rng):
        g = random_weighted_graph(3, rng)
        for eps in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                threshold(g, eps)

    def test_monotone_in_eps(self, rng):
        # arcs shrink and alpha grows as the threshold rises
        for _ in range(200):
            n = int(rng.integers(2, 13))
            g = random_weighted_graph(n, rng)
            e1, e2 = sorted(rng.uniform(0.05, 1.0, size=2))
            a1 = threshold(g, e1).arc_set()
            a2 = threshold(g, e2).arc_set()
            assert a2 <= a1
            assert independence_number(threshold(g, e2)) >= independence_number(
                threshold(g, e1)
            )


class TestEffectiveIndependenceNumber:
    def test_all_half_three_nodes(self):
        w = np.full((3, 3), 0.5)
        np.fill_diagonal(w, 1.0)
        res = effective_independence_number(ObservationGraph(3, w))
        assert res.alpha_star == 3.0
        assert res.epsilon_star == 1.0
        assert res.curve == [(0.5, 1), (1.0, 3)]

    def test_two_nodes_point_nine(self):
        w = np.array([[1.0, 0.9], [0.9, 1.0]])
        res = effective_independence_number(ObservationGraph(2, w))
        assert res.alpha_star == pytest.approx(1.0 / 0.81, abs=1e-12)
        assert res.epsilon_star == 0.9

    def test_binary_graph_matches_independence_number(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 13))
            g = random_weighted_graph(n, rng, values=np.array([0.0, 1.0]))
            res = effective_independence_number(g)
            assert res.epsilon_star == 1.0
            assert res.alpha_star == independence_number(threshold(g, 1.0))

    def test_identity_graph(self):
        res = effective_independence_number(identity_graph(9))
        assert res.alpha_star == 9.0 and res.epsilon_star == 1.0

    def test_bounds_one_to_n(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 11))
            g = random_weighted_graph(n, rng)
            res = effective_independence_number(g)
            assert 1.0 <= res.alpha_star <= n

    def test_lower_bounded_weights(self, rng):
        # all off-diagonal weights >= c forces alpha* <= 1/c^2
        for c in (0.3, 0.5, 0.8):
            g = gen_random_uniform(12, c, 1.0, rng)
            assert effective_independence_number(g).alpha_star <= 1.0 / c**2 + 1e-12

    def test_alpha_star_is_min_over_curve(self, rng):
        for _ in range(20):
            g = random_weighted_graph(int(rng.integers(2, 10)), rng)
            res = effective_independence_number(g)
            vals = [a / (e * e) for e, a in res.curve]
            assert res.alpha_star == min(vals)
            # the minimizer is a candidate, largest among exact ties
            minimizers = [e for (e, a), v in zip(res.curve, vals) if v == res.alpha_star]
            assert res.epsilon_star == max(minimizers)

    def test_curve_alpha_by_enumeration(self, rng):
        g = random_weighted_graph(8, rng)
        res = effective_independence_number(g)
        for eps, alpha in res.curve:
            sym = threshold(g, eps).symmetrized()
            assert alpha == mis_by_enumeration(sym, 8)


class TestGenerators:
    def test_grid_single_node(self):
        g = gen_grid_geometric(1, "inv_one_plus_d2")
        assert g.n == 1 and g.weights.tolist() == [[1.0]]

    def test_grid_k2_inverse_rule(self):
        g = gen_grid_geometric(2, "inv_one_plus_d2")
        # spacing 1 at k=2: adjacent pairs 1/2, the diagonal pair 1/3
        assert g.weights[0, 1] == pytest.approx(0.5)
        assert g.weights[0, 2] == pytest.approx(0.5)
        assert g.weights[0, 3] == pytest.approx(1.0 / 3.0)

    def test_grid_k5_min_rule_unit_weights(self):
        g = gen_grid_geometric(5, "min_3_over_d2")
        pts = [(x, y) for y in range(5) for x in range(5)]
        for i in range(25):
            for j in range(25):
                if i == j:
                    continue
                d2 = (pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2
                if d2 <= 3:
                    assert g.weights[i, j] == 1.0
                else:
                    assert g.weights[i, j] == pytest.approx(3.0 / d2)

    def test_grid_symmetry_and_diagonal(self):
        for rule in ("inv_one_plus_d2", "min_3_over_d2"):
            g = gen_grid_geometric(4, rule)
            assert np.array_equal(g.weights, g.weights.T)
            assert np.all(np.diag(g.weights) == 1.0)

    def test_grid_rejects_bad_args(self):
        with pytest.raises(ValueError):
            gen_grid_geometric(0, "min_3_over_d2")
        with pytest.raises(ValueError):
            gen_grid_geometric(3, "nope")

    def test_uniform_bandit_and_complete_cases(self, rng):
        g0 = gen_random_uniform(6, 0.0, 0.0, rng)
        assert np.array_equal(g0.weights, np.eye(6))
        g1 = gen_random_uniform(6, 1.0, 1.0, rng)
        assert np.all(g1.weights == 1.0)
        assert effective_independence_number(g1).alpha_star == 1.0

    def test_uniform_determinism(self):
        a = gen_random_uniform(8, 0.1, 0.9, np.random.default_rng(7))
        b = gen_random_uniform(8, 0.1, 0.9, np.random.default_rng(7))
        assert np.array_equal(a.weights, b.weights)

    def test_uniform_rejects_bad_range(self, rng):
        for lo, hi in ((-0.1, 0.5), (0.6, 0.4), (0.5, 1.2)):
            with pytest.raises(ValueError):
                gen_random_uniform(4, lo, hi, rng)


class TestQUpperBound:
    def test_reference_value(self):
        assert q_upper_bound(1.0, 1, 1.0) == pytest.approx(
            2.0 * (1.0 + math.log(4.0)), abs=1e-12
        )

    def test_monotone_in_n(self):
        vals = [q_upper_bound(2.0, n, 0.5) for n in (2, 5, 10, 50)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_monotone_decreasing_in_gamma(self):
        vals = [q_upper_bound(2.0, 10, g) for g in (0.01, 0.1, 1.0, 10.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            q_upper_bound(1.0, 3, 0.0)
        with pytest.raises(ValueError):
            q_upper_bound(0.5, 3, 1.0)


def test_binary_digraph_rejects_self_loops():
    with pytest.raises(ValueError):
        BinaryDigraph(2, (0b01, 0b00))
