import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from manireg.kernels import (
    Exponential,
    Gaussian,
    KernelError,
    Linear,
    Min,
    Normalized,
    Polynomial,
    combine_kernels,
    eval_kernel,
    gram_matrix,
    kernel_distance,
    kernel_from_spec,
    parse_kernel,
)


def test_eval_examples():
    assert eval_kernel(Gaussian(1.0), [0.3, -1.2], [0.3, -1.2]) == 1.0
    assert eval_kernel(Linear(), [1, 2], [3, 4]) == 11
    assert eval_kernel(Min(), 2.5, 1.0) == 1.0


def test_eval_dimension_mismatch():
    with pytest.raises(KernelError):
        eval_kernel(Linear(), [1, 2], [1, 2, 3])


@pytest.mark.parametrize("bad", [
    lambda: Gaussian(0.0), lambda: Gaussian(-1.0), lambda: Exponential(0.0),
    lambda: Polynomial(1.0, 0), lambda: Polynomial(1.0, 1.5),
])
def test_nonpositive_hyperparameters_rejected(bad):
    with pytest.raises(KernelError):
        bad()


def test_min_kernel_rejects_negative():
    with pytest.raises(KernelError):
        eval_kernel(Min(), -1.0, 2.0)


def test_gram_examples(rng):
    assert np.array_equal(gram_matrix(Linear(), np.eye(2)), np.eye(2))
    G = gram_matrix(Gaussian(0.7), rng.normal(size=(5, 3)))
    assert np.array_equal(np.diag(G), np.ones(5))
    G = gram_matrix(Gaussian(1.0), rng.normal(size=(10, 2)))
    assert np.linalg.eigvalsh(G)[0] >= -1e-10


def test_gram_is_exactly_symmetric_and_matches_eval(rng):
    X = rng.normal(size=(7, 3))
    k = Polynomial(0.5, 3) + Gaussian(2.0)
    G = gram_matrix(k, X)
    assert np.array_equal(G, G.T)
    for i in range(7):
        for j in range(7):
            assert G[i, j] == pytest.approx(k.eval(X[i], X[j]), rel=1e-13)


def test_gram_empty():
    with pytest.raises(KernelError):
        gram_matrix(Linear(), np.zeros((0, 2)))


def test_kernel_distance_examples(rng):
    assert kernel_distance(Min(), 3.0, 1.0) == pytest.approx(math.sqrt(2))
    for _ in range(20):
        x, y = rng.normal(size=(2, 3))
        assert kernel_distance(Gaussian(1.0), x, y) < math.sqrt(2)
    for k in (Linear(), Gaussian(0.3), Polynomial(1, 3), Min()):
        assert kernel_distance(k, [0.4], [0.4]) == 0.0


def test_kernel_distance_rejects_nonpositive_function():
    class Bad(Linear):
        def _cross(self, X, Y):
            return (X[:, :1] != Y[:, 0][None, :]).astype(float)

    with pytest.raises(KernelError):
        kernel_distance(Bad(), [1.0], [2.0])


def test_combine_examples(rng):
    s = combine_kernels("sum", Linear(), Linear())
    assert s.eval([1, 0], [1, 0]) == 2
    g = Gaussian(0.8)
    ng = combine_kernels("normalized", g)
    X = rng.normal(size=(12, 2))
    np.testing.assert_allclose(gram_matrix(ng, X), gram_matrix(g, X), rtol=0, atol=1e-15)
    e = combine_kernels("exp", Linear())
    assert np.linalg.eigvalsh(gram_matrix(e, rng.normal(size=(8, 2))))[0] >= -1e-10


def test_normalized_zero_diagonal_errors():
    with pytest.raises(KernelError):
        gram_matrix(Normalized(Linear()), [[0.0, 0.0], [1.0, 0.0]])


def test_normalized_has_unit_diagonal(rng):
    X = rng.normal(size=(6, 3))
    G = gram_matrix(Normalized(Polynomial(1.0, 3)), X)
    np.testing.assert_allclose(np.diag(G), 1.0, rtol=1e-14)


def test_scale_and_warp_rules(rng):
    X = rng.normal(size=(6, 2))
    f = lambda x: 1.0 + x[0] ** 2
    sk = combine_kernels("scale", Gaussian(1.0), f)
    G = gram_matrix(sk, X)
    fx = np.array([f(x) for x in X])
    np.testing.assert_allclose(G, fx[:, None] * gram_matrix(Gaussian(1.0), X) * fx[None, :])
    wk = combine_kernels("warp", Linear(), lambda x: np.array([x.sum(), x[0] * x[1]]))
    assert wk.eval([1.0, 2.0], [3.0, 1.0]) == pytest.approx(3 * 4 + 2 * 3)


def test_polynomial_matches_explicit_feature_map(rng):
    def phi(x):
        r2 = math.sqrt(2)
        return np.array([1, r2 * x[0], r2 * x[1], r2 * x[0] * x[1], x[0] ** 2, x[1] ** 2])

    k = Polynomial(1.0, 2)
    for _ in range(50):
        x, y = rng.normal(size=(2, 2))
        assert abs(k.eval(x, y) - phi(x) @ phi(y)) <= 1e-12 * max(1.0, abs(k.eval(x, y)))


ALL_KERNELS = [
    Linear(), Polynomial(1.0, 2), Polynomial(0.0, 3), Gaussian(0.5), Exponential(1.3),
    Linear() + Gaussian(1.0), Polynomial(1.0, 2) * Gaussian(2.0),
    combine_kernels("exp", Gaussian(1.0)), Normalized(Polynomial(1.0, 3)),
    combine_kernels("scale", Gaussian(1.0), lambda x: np.cos(x[0])),
    combine_kernels("warp", Gaussian(1.0), lambda x: np.tanh(x)),
]


@pytest.mark.parametrize("k", ALL_KERNELS, ids=lambda k: type(k).__name__)
@settings(max_examples=25, deadline=None)
@given(X=arrays(np.float64, st.tuples(st.integers(1, 30), st.just(2)),
                elements=st.floats(-2, 2, allow_nan=False)))
def test_gram_psd_and_symmetric(k, X):
    G = gram_matrix(k, X)
    assert np.array_equal(G, G.T)
    scale = max(1.0, np.abs(np.diag(G)).max())
    assert np.linalg.eigvalsh(G)[0] >= -1e-8 * scale


@settings(max_examples=40, deadline=None)
@given(X=arrays(np.float64, (20,), elements=st.floats(0, 5, allow_nan=False)))
def test_min_kernel_gram_psd(X):
    G = gram_matrix(Min(), X)
    assert np.linalg.eigvalsh(G)[0] >= -1e-8 * max(1.0, G.diagonal().max())


@pytest.mark.parametrize("k", [Gaussian(0.7), Linear()], ids=["gaussian", "linear"])
def test_distance_is_a_metric(k, rng):
    for _ in range(200):
        x, y, z = rng.normal(size=(3, 3))
        dxy, dyx = kernel_distance(k, x, y), kernel_distance(k, y, x)
        assert dxy == pytest.approx(dyx, abs=1e-12)
        assert dxy <= kernel_distance(k, x, z) + kernel_distance(k, z, y) + 1e-9


def test_spec_roundtrip():
    k = Normalized(Polynomial(1.0, 2) + Gaussian(0.25) * Exponential(2.0))
    k2 = kernel_from_spec(k.spec())
    assert k2 == k
    assert parse_kernel("gaussian:sigma2=0.5") == Gaussian(0.5)
    assert parse_kernel("polynomial:c=1,p=2") == Polynomial(1.0, 2)
    with pytest.raises(KernelError):
        kernel_from_spec({"kind": "gaussian", "sigma": 1.0})
    with pytest.raises(KernelError):
        combine_kernels("scale", Linear(), abs).spec()
