import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mktwsvm.errors import InputError
from mktwsvm.kernels import (CombinedSpam, Linear, Polynomial, Rbf, Tanh, eval_kernel, gram,
                             parse_kernel, psd_check)
from oracles import combined_scalar

ALL_SPECS = [Linear(), Linear(1.5), Rbf(0.5), Rbf(2.0), Tanh(0.3, 0.1), Polynomial(3, 1.0),
             CombinedSpam(), CombinedSpam(0.5, 0.2), CombinedSpam(square="argument")]

finite = st.floats(-20, 20, allow_nan=False, allow_infinity=False)


def vec_pairs(max_dim=6):
    return st.integers(1, max_dim).flatmap(
        lambda d: st.tuples(arrays(np.float64, d, elements=finite),
                            arrays(np.float64, d, elements=finite)))


class TestScalarValues:
    def test_linear_dot(self):
        assert eval_kernel(Linear(), [1, 2], [3, 4]) == 11.0

    def test_combined_at_zero(self):
        assert eval_kernel(CombinedSpam(), [1, 0], [0, 1]) == 0.0

    @pytest.mark.parametrize("dot,x,y", [(1, [1.0], [1.0]), (2, [1.0], [2.0]),
                                         (2, [1.0, 1.0], [1.0, 1.0])])
    def test_combined_matches_high_precision(self, dot, x, y):
        assert abs(eval_kernel(CombinedSpam(), x, y) - combined_scalar(dot)) < 1e-12

    def test_combined_printed_value_at_one(self):
        assert abs(eval_kernel(CombinedSpam(), [1.0], [1.0]) - 1.580026) < 1e-6

    def test_combined_at_two(self):
        # tanh(2)^2 = 0.9293491751..., so the value is 2.9293491751...
        assert abs(eval_kernel(CombinedSpam(), [1.0], [2.0]) - 2.929349175) < 1e-9

    def test_rbf(self):
        assert abs(eval_kernel(Rbf(0.5), [0, 0], [1, 1]) - math.exp(-1.0)) < 1e-15
        assert abs(eval_kernel(Rbf(0.5), [0, 0], [1, 1]) - 0.367879) < 1e-6

    def test_argument_reading(self):
        value = eval_kernel(CombinedSpam(square="argument"), [1.0], [2.0])
        assert abs(value - (math.tanh(4.0) + 2.0)) < 1e-15

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            eval_kernel(Linear(), [1, 2], [1, 2, 3])


class TestGram:
    def test_identity_basis(self):
        np.testing.assert_array_equal(gram(Linear(), [[1, 0], [0, 1]]).entries, np.eye(2))

    def test_combined_row(self):
        g = gram(CombinedSpam(), [[1.0]], [[1.0], [2.0]])
        np.testing.assert_allclose(g.entries, [[combined_scalar(1), combined_scalar(2)]],
                                   rtol=0, atol=1e-14)
        assert (g.row_count, g.col_count) == (1, 2)

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            gram(Linear(), [[np.nan, 1.0]])

    def test_large_blocks_match_small(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((300, 40))
        full = gram(Rbf(0.1), X).entries
        for i in (0, 123, 299):
            for j in (5, 200):
                assert full[i, j] == eval_kernel(Rbf(0.1), X[i], X[j])


class TestParse:
    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_describe_round_trip(self, spec):
        assert parse_kernel(spec.describe()) == spec

    def test_aliases(self):
        assert parse_kernel("ck") == CombinedSpam()
        assert parse_kernel("gaussian:gamma=2") == Rbf(2.0)
        assert parse_kernel("sigmoid:k=0.5") == Tanh(0.5, 0.0)

    @pytest.mark.parametrize("text", ["nope", "rbf:gamma=-1", "rbf:sigma=1", "poly:degree=1.5",
                                      "combined:square=cube", "linear:b=abc"])
    def test_rejects(self, text):
        with pytest.raises(InputError):
            parse_kernel(text)


class TestPsd:
    def test_indefinite_two_by_two(self):
        report = psd_check(np.array([[1.0, 2.0], [2.0, 1.0]]), tol=1e-8)
        assert abs(report.min_eigenvalue + 1.0) < 1e-12
        assert not report.is_psd

    def test_tanh_can_be_indefinite(self):
        X = np.array([[0.0], [1.0], [3.0]])
        report = psd_check(gram(Tanh(1.0, 0.0), X))
        assert report.min_eigenvalue == pytest.approx(np.linalg.eigvalsh(np.tanh(X @ X.T))[0])
        assert not report.is_psd

    def test_asymmetric_rejected(self):
        with pytest.raises(InputError):
            psd_check(np.array([[1.0, 0.0], [1.0, 1.0]]))


@settings(max_examples=200, deadline=None)
@given(vec_pairs(), st.sampled_from(ALL_SPECS))
def test_symmetry(pair, spec):
    x, y = pair
    assert abs(eval_kernel(spec, x, y) - eval_kernel(spec, y, x)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 5), st.integers(0, 2**32 - 1),
       st.sampled_from(ALL_SPECS))
def test_gram_matches_scalar_bitwise(n, d, seed, spec):
    X = np.random.default_rng(seed).uniform(-3, 3, (n, d))
    G = gram(spec, X).entries
    for i in range(n):
        for j in range(n):
            assert G[i, j] == eval_kernel(spec, X[i], X[j])
    np.testing.assert_array_equal(G, G.T)


@settings(max_examples=200, deadline=None)
@given(vec_pairs())
def test_combined_dominates_linear(pair):
    x, y = pair
    assert eval_kernel(CombinedSpam(), x, y) >= eval_kernel(Linear(), x, y)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(1, 6), st.integers(0, 2**32 - 1),
       st.sampled_from([Linear(), Rbf(0.2), Rbf(1.0), Rbf(5.0)]))
def test_linear_and_rbf_are_psd(n, d, seed, spec):
    X = np.random.default_rng(seed).standard_normal((n, d))
    assert psd_check(gram(spec, X), tol=1e-8).is_psd
