import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathfinder_ops import (
    ChainParams,
    EmptyGrid,
    NonUniqueStationary,
    build_transition_matrix,
    default_grid,
    steady_state,
    sweep_steady_state,
    sweep_to_csv,
)
from pathfinder_ops.chain import STRUCTURAL_ZEROS

from oracles import closed_form_pi, power_iteration


def pi_for(g, a, s):
    return steady_state(build_transition_matrix(ChainParams(g, a, s)))


class TestChainParams:
    @pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan"), 2.0])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            ChainParams(bad, 0.5, 0.5)
        with pytest.raises(ValueError):
            ChainParams(0.5, bad, 0.5)
        with pytest.raises(ValueError):
            ChainParams(0.5, 0.5, bad)

    def test_accepts_boundaries(self):
        ChainParams(0.0, 0.0, 0.0)
        ChainParams(1.0, 1.0, 1.0)


class TestTransitionMatrix:
    def test_exact_layout(self):
        g, a, s = 0.3, 0.81, 0.87
        P = build_transition_matrix(ChainParams(g, a, s))
        expected = np.array(
            [
                [1 - g, g, 0.0, 0.0],
                [0.0, 1 - a, a, 0.0],
                [1 - s, 0.0, 0.0, s],
                [1 - g, 0.0, 0.0, g],
            ]
        )
        np.testing.assert_allclose(P, expected, atol=0)

    def test_structural_zero_pattern(self):
        P = build_transition_matrix(ChainParams(0.3, 0.4, 0.5))
        for i, j in STRUCTURAL_ZEROS:
            assert P[i, j] == 0.0
        nonzero = {(i, j) for i in range(4) for j in range(4)} - set(STRUCTURAL_ZEROS)
        for i, j in nonzero:
            assert P[i, j] > 0.0

    def test_zero_weather_forces_closed_rows(self):
        P = build_transition_matrix(ChainParams(0.0, 0.5, 0.5))
        np.testing.assert_array_equal(P[0], [1, 0, 0, 0])
        np.testing.assert_array_equal(P[3], [1, 0, 0, 0])

    def test_deterministic_accept_success_rows(self):
        P = build_transition_matrix(ChainParams(0.5, 1.0, 1.0))
        np.testing.assert_array_equal(P[1], [0, 0, 1, 0])
        np.testing.assert_array_equal(P[2], [0, 0, 0, 1])

    def test_pathfinding_row_from_calibrated_values(self):
        P = build_transition_matrix(ChainParams(0.3, 0.81, 0.87))
        np.testing.assert_allclose(P[2], [0.13, 0.0, 0.0, 0.87], atol=1e-15)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            g, a, s = rng.uniform(0, 1, 3)
            P = build_transition_matrix(ChainParams(g, a, s))
            np.testing.assert_allclose(P.sum(axis=1), np.ones(4), atol=1e-12)


class TestSteadyState:
    def test_hand_solved_example(self):
        pi = pi_for(0.5, 1.0, 1.0)
        np.testing.assert_allclose(pi, [1 / 3, 1 / 6, 1 / 6, 1 / 3], atol=1e-12)

    def test_calibrated_low_weather_endpoint(self):
        pi = pi_for(0.1, 0.81, 0.87)
        assert pi[0] == pytest.approx(0.757, abs=5e-3)
        assert pi[3] == pytest.approx(0.073, abs=5e-3)

    def test_calibrated_high_weather_endpoint(self):
        pi = pi_for(0.9, 0.81, 0.87)
        assert pi[0] == pytest.approx(0.092, abs=5e-3)
        assert pi[3] == pytest.approx(0.722, abs=5e-3)

    def test_stationarity_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            g, a = rng.uniform(0.01, 0.99, 2)
            s = rng.uniform(0.0, 1.0)
            P = build_transition_matrix(ChainParams(g, a, s))
            pi = steady_state(P)
            assert np.max(np.abs(pi @ P - pi)) <= 1e-10
            assert abs(pi.sum() - 1.0) <= 1e-10
            assert np.all(pi >= 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        g=st.floats(0.01, 0.99),
        a=st.floats(0.01, 1.0),
        s=st.floats(0.0, 1.0),
    )
    def test_pathfinding_proportionality(self, g, a, s):
        pi = pi_for(g, a, s)
        assert abs(pi[2] - a * pi[1]) <= 1e-10

    @settings(max_examples=200, deadline=None)
    @given(
        g=st.floats(0.01, 0.99),
        a=st.floats(0.01, 1.0),
        s=st.floats(0.0, 1.0),
    )
    def test_closed_form_agreement(self, g, a, s):
        pi = pi_for(g, a, s)
        np.testing.assert_allclose(pi, closed_form_pi(g, a, s), atol=1e-10)

    def test_power_iteration_agreement(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            g, a, s = rng.uniform(0.05, 0.95, 3)
            P = build_transition_matrix(ChainParams(g, a, s))
            np.testing.assert_allclose(steady_state(P), power_iteration(P), atol=1e-8)

    def test_monotone_in_weather(self):
        a, s = 0.6, 0.7
        grid = np.linspace(0.02, 0.98, 49)
        pis = np.array([pi_for(g, a, s) for g in grid])
        assert np.all(np.diff(pis[:, 3]) >= -1e-12)
        assert np.all(np.diff(pis[:, 0]) <= 1e-12)

    def test_absorbing_closed_state(self):
        # g = 0 leaves a single recurrent class {Gate Closed}.
        np.testing.assert_allclose(pi_for(0.0, 0.5, 0.5), [1, 0, 0, 0], atol=1e-12)

    def test_absorbing_open_state(self):
        np.testing.assert_allclose(pi_for(1.0, 0.5, 0.5), [0, 0, 0, 1], atol=1e-12)

    def test_two_recurrent_classes_raises(self):
        # g = 0 and a = 0: both Gate Closed and Selection are absorbing.
        with pytest.raises(NonUniqueStationary):
            pi_for(0.0, 0.0, 0.5)
        # g = 1 and s = 0: {0,1,2} cycles while Gate Opened is absorbing.
        with pytest.raises(NonUniqueStationary):
            pi_for(1.0, 0.5, 0.0)

    def test_rejects_non_stochastic_matrix(self):
        P = build_transition_matrix(ChainParams(0.5, 0.5, 0.5))
        P[0, 0] += 1e-6
        with pytest.raises(ValueError):
            steady_state(P)
        with pytest.raises(ValueError):
            steady_state(np.eye(3))


class TestSweep:
    def test_singleton_matches_point_solve(self):
        rows = sweep_steady_state([0.5], [1.0], [1.0])
        assert len(rows) == 1
        assert rows[0].status == "ok"
        np.testing.assert_allclose(rows[0].pi, [1 / 3, 1 / 6, 1 / 6, 1 / 3], atol=1e-12)

    def test_calibrated_endpoints(self):
        rows = sweep_steady_state([0.1, 0.9], [0.81], [0.87])
        assert [r.params.p_good for r in rows] == [0.1, 0.9]
        assert rows[0].pi[0] == pytest.approx(0.757, abs=5e-3)
        assert rows[1].pi[3] == pytest.approx(0.722, abs=5e-3)

    def test_proportionality_across_grid(self):
        grid = [round(0.1 * i, 10) for i in range(1, 10)]
        rows = sweep_steady_state(grid, grid, [1.0])
        assert len(rows) == 81
        for row in rows:
            assert row.status == "ok"
            assert abs(row.pi[2] - row.params.p_accept * row.pi[1]) <= 1e-10

    def test_lexicographic_order_even_for_unsorted_input(self):
        rows = sweep_steady_state([0.9, 0.1], [0.5, 0.3], [1.0, 0.2])
        keys = [(r.params.p_good, r.params.p_accept, r.params.p_success) for r in rows]
        assert keys == sorted(keys)

    def test_degenerate_cells_become_error_rows(self):
        # g=1, s=0 has no unique stationary distribution.
        rows = sweep_steady_state([0.5, 1.0], [0.5], [0.0])
        assert [r.status for r in rows] == ["ok", "non_unique"]
        assert rows[1].pi is None

    def test_empty_grid_raises(self):
        with pytest.raises(EmptyGrid):
            sweep_steady_state([], [0.5], [0.5])

    def test_out_of_range_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep_steady_state([0.0], [0.5], [0.5])  # g must be > 0
        with pytest.raises(ValueError):
            sweep_steady_state([0.5], [1.5], [0.5])

    def test_parallel_matches_serial(self):
        grid = [0.2, 0.5, 0.8]
        serial = sweep_steady_state(grid, grid, [0.5, 1.0])
        parallel = sweep_steady_state(grid, grid, [0.5, 1.0], max_workers=4)
        assert len(serial) == len(parallel)
        for a, b in zip(serial, parallel):
            assert a.params == b.params and a.status == b.status
            np.testing.assert_array_equal(a.pi, b.pi)

    def test_csv_shape_and_precision(self):
        rows = sweep_steady_state([0.5, 1.0], [0.5], [0.0])
        text = sweep_to_csv(rows)
        lines = text.strip().split("\n")
        assert lines[0] == "p_good,p_accept,p_success,pi0,pi1,pi2,pi3,status"
        ok_cols = lines[1].split(",")
        assert ok_cols[-1] == "ok"
        # 12 significant digits round-trip through the text form
        assert float(ok_cols[3]) == pytest.approx(rows[0].pi[0], rel=1e-11)
        bad_cols = lines[2].split(",")
        assert bad_cols[3:7] == ["", "", "", ""]
        assert bad_cols[-1] == "non_unique"

    def test_default_grid(self):
        grid = default_grid()
        assert grid[0] == pytest.approx(0.05)
        assert grid[-1] == pytest.approx(0.95)
        assert len(grid) == 19
        assert all(0.0 < g < 1.0 for g in grid)
