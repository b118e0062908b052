"""The oracles are checked on problems with known answers before anything
else relies on them."""

import itertools
import math

import numpy as np

from oracles import box_qp_oracle, combined_scalar, svm_dual_oracle


def test_box_oracle_interior_optimum():
    val, x = box_qp_oracle(np.eye(2), [-1.0, -1.0], 0.0, 10.0)
    np.testing.assert_allclose(x, [1.0, 1.0])
    assert math.isclose(val, -1.0)


def test_box_oracle_clamped():
    val, x = box_qp_oracle([[1.0]], [-10.0], 0.0, 2.0)
    np.testing.assert_allclose(x, [2.0])
    assert math.isclose(val, 0.5 * 4 - 20)


def test_box_oracle_matches_dense_grid():
    rng = np.random.default_rng(3)
    grid = np.linspace(0.0, 1.0, 401)
    for _ in range(5):
        F = rng.standard_normal((2, 2))
        Q = F @ F.T
        q = rng.standard_normal(2)
        val, _ = box_qp_oracle(Q, q, 0.0, 1.0)
        brute = min(0.5 * np.array([a, b]) @ Q @ np.array([a, b]) + q @ [a, b]
                    for a, b in itertools.product(grid, grid))
        assert val <= brute + 1e-12
        assert brute - val < 1e-3


def test_svm_oracle_two_points():
    val, a = svm_dual_oracle([[1.0, -1.0], [-1.0, 1.0]], [1.0, -1.0], 1.0)
    np.testing.assert_allclose(a, [0.5, 0.5])
    assert math.isclose(val, 0.5)


def test_svm_oracle_contradictory_pair_saturates():
    val, a = svm_dual_oracle([[1.0, 1.0], [1.0, 1.0]], [1.0, -1.0], 1.0)
    np.testing.assert_allclose(a, [1.0, 1.0])
    assert math.isclose(val, 2.0)


def test_combined_scalar_values():
    assert combined_scalar(0) == 0.0
    assert abs(combined_scalar(1) - (math.tanh(1) ** 2 + 1)) < 1e-15
