import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mktwsvm.errors import InputError
from mktwsvm.qp import BoxQp, kkt_residual, solve_box_qp
from oracles import box_qp_oracle, random_psd


def test_interior_optimum():
    sol = solve_box_qp(BoxQp(np.eye(2), [-1.0, -1.0], 0.0, 10.0))
    np.testing.assert_allclose(sol.alpha, [1.0, 1.0], atol=1e-9)
    assert sol.objective == pytest.approx(-1.0)
    assert sol.converged


def test_scaled_identity():
    sol = solve_box_qp(BoxQp(2 * np.eye(2), [-1.0, -1.0], 0.0, 1.0))
    np.testing.assert_allclose(sol.alpha, [0.5, 0.5], atol=1e-9)
    assert sol.objective == pytest.approx(-0.5)


def test_clamped_to_upper_bound():
    sol = solve_box_qp(BoxQp([[1.0]], [-10.0], 0.0, 2.0))
    assert sol.alpha.tolist() == [2.0]
    assert sol.kkt_residual == 0.0


class TestKktResidual:
    def test_zero_at_optimum(self):
        assert kkt_residual(BoxQp(np.eye(2), [-1.0, -1.0], 0.0, 10.0), [1.0, 1.0]) == 0.0

    def test_upper_bound_with_negative_gradient(self):
        assert kkt_residual(BoxQp([[1.0]], [-10.0], 0.0, 2.0), [2.0]) == 0.0

    def test_violation_at_lower_bound(self):
        assert kkt_residual(BoxQp(np.eye(2), [-1.0, -1.0], 0.0, 10.0), [0.0, 0.0]) == 1.0

    def test_infeasible_alpha_rejected(self):
        with pytest.raises(InputError):
            kkt_residual(BoxQp(np.eye(2), [-1.0, -1.0], 0.0, 1.0), [2.0, 0.0])


class TestValidation:
    def test_asymmetric(self):
        with pytest.raises(InputError):
            BoxQp([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0], 0.0, 1.0)

    def test_bad_bounds(self):
        with pytest.raises(InputError):
            BoxQp(np.eye(2), [0.0, 0.0], 1.0, 0.0)

    def test_shape(self):
        with pytest.raises(InputError):
            BoxQp(np.eye(3), [0.0, 0.0], 0.0, 1.0)


def test_zero_diagonal_uses_trace_step():
    # the second coordinate has no curvature; it still moves to its bound
    Q = np.array([[1.0, 0.0], [0.0, 0.0]])
    sol = solve_box_qp(BoxQp(Q, [-1.0, -1.0], 0.0, 1.0))
    np.testing.assert_allclose(sol.alpha, [1.0, 1.0])
    assert sol.converged


def test_zero_matrix():
    sol = solve_box_qp(BoxQp(np.zeros((2, 2)), [1.0, -1.0], -1.0, 3.0))
    np.testing.assert_allclose(sol.alpha, [-1.0, 3.0])


def test_iteration_cap_reports_non_convergence():
    rng = np.random.default_rng(1)
    Q = random_psd(rng, 30, rank=3)
    sol = solve_box_qp(BoxQp(Q, -np.ones(30), 0.0, 1.0), max_iters=1, polish_every=0)
    assert not sol.converged
    assert sol.iterations == 1
    assert sol.kkt_residual > 1e-6


def test_rank_deficient_dual_converges():
    # a low-rank Gram-like matrix of the kind twin-SVM duals produce
    rng = np.random.default_rng(5)
    F = rng.standard_normal((300, 21))
    sol = solve_box_qp(BoxQp(F @ F.T, -np.ones(300), 0.0, 1.0))
    assert sol.converged
    assert sol.kkt_residual <= 1e-6


@st.composite
def small_problems(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    rank = draw(st.integers(0, n))
    Q = random_psd(rng, n, rank) + (1e-3 * np.eye(n) if draw(st.booleans()) else 0.0)
    q = rng.standard_normal(n) * 3
    lower = rng.uniform(-2, 0, n)
    upper = lower + rng.uniform(0.1, 3, n)
    return BoxQp(Q, q, lower, upper)


@settings(max_examples=150, deadline=None)
@given(small_problems(), st.integers(0, 1000))
def test_matches_oracle(p, seed):
    sol = solve_box_qp(p, seed=seed)
    best, _ = box_qp_oracle(p.Q, p.q, p.lower, p.upper)
    assert abs(sol.objective - best) <= 1e-4 * max(1.0, abs(best))
    assert sol.kkt_residual <= 1e-6


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1), st.sampled_from([0, 3, 10]))
def test_history_is_monotone_and_feasible(n, seed, polish_every):
    rng = np.random.default_rng(seed)
    p = BoxQp(random_psd(rng, n, max(1, n // 3)), rng.standard_normal(n), 0.0, 1.0)
    sol = solve_box_qp(p, seed=seed, polish_every=polish_every)
    h = np.array(sol.history)
    assert np.all(h[1:] <= h[:-1] + 1e-12 * np.maximum(1.0, np.abs(h[:-1])))
    assert np.all(sol.alpha >= p.lower) and np.all(sol.alpha <= p.upper)
    if len(h):
        assert h[-1] == pytest.approx(sol.objective, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_deterministic(n, seed):
    rng = np.random.default_rng(seed)
    p = BoxQp(random_psd(rng, n), rng.standard_normal(n), 0.0, 1.0)
    a = solve_box_qp(p, seed=seed)
    b = solve_box_qp(p, seed=seed)
    assert np.array_equal(a.alpha, b.alpha)
    assert a.history == b.history
