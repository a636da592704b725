import math

import numpy as np
import pytest

from manireg import graph as G
from manireg import spectral as S
from manireg.spectral import SpectralError

from conftest import brute_cheeger


def eig(g, normalized=False):
    return S.spectrum(G.laplacian(g, normalized)).eigenvalues


def test_spectrum_examples():
    np.testing.assert_allclose(eig(G.complete_graph(4)), [0, 4, 4, 4], atol=1e-12)
    np.testing.assert_allclose(eig(G.star_graph(5)), [0, 1, 1, 1, 5], atol=1e-12)
    n = 4
    formula = sorted(2 - 2 * math.cos(2 * math.pi * j / n) for j in range(n))
    np.testing.assert_allclose(eig(G.cycle_graph(4)), formula, atol=1e-12)
    np.testing.assert_allclose(eig(G.cycle_graph(4)), [0, 2, 2, 4], atol=1e-12)


def test_spectrum_invariants(rng):
    for _ in range(10):
        g = G.random_graph(15, 0.4, rng)
        L = G.laplacian(g)
        sd = S.spectrum(L)
        lam, P = sd.eigenvalues, sd.eigenvectors
        assert np.all(np.diff(lam) >= 0)
        assert lam[0] >= -1e-8
        assert np.max(np.linalg.norm(L.matrix @ P - P * lam, axis=0)) <= 1e-8 * max(1, lam[-1])
        assert np.max(np.abs(P.T @ P - np.eye(15))) <= 1e-9


def test_spectrum_rejects_asymmetric():
    with pytest.raises(SpectralError):
        S.spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_zero_multiplicity_equals_components(rng):
    for _ in range(50):
        g = G.random_graph(int(rng.integers(2, 16)), float(rng.uniform(0.05, 0.4)), rng)
        assert S.spectrum(G.laplacian(g)).zero_multiplicity() == G.connected_components(g)


def test_bounds_cycle4():
    b = S.eigenvalue_bounds(G.cycle_graph(4))
    assert b.lambda2 == pytest.approx(2.0)
    assert b.fiedler_upper == pytest.approx(8 / 3)
    assert b.trace_check[0] == pytest.approx(8.0) and b.trace_check[1] == 8.0
    assert b.lambda_n == pytest.approx(4.0)
    assert b.merris_upper == 4.0
    assert b.all_hold()


def test_bounds_hold_on_random_graphs(rng):
    for _ in range(40):
        g = G.random_graph(int(rng.integers(3, 13)), float(rng.uniform(0.1, 0.9)), rng)
        b = S.eigenvalue_bounds(g)
        assert b.all_hold(), b.checks
        if not b.connected:
            assert "fiedler_lambda2_upper" not in b.checks


def test_lambda_n_equals_n_iff_complement_disconnected(rng):
    seen = set()
    for _ in range(60):
        n = int(rng.integers(3, 10))
        g = G.random_graph(n, float(rng.uniform(0.3, 0.95)), rng)
        ln = eig(g)[-1]
        assert ln <= n + 1e-8
        eq = abs(ln - n) <= 1e-8
        assert eq == (G.connected_components(g.complement()) > 1)
        seen.add(eq)
    assert seen == {True, False}


def test_complement_spectrum_examples():
    np.testing.assert_allclose(S.complement_spectrum(eig(G.empty_graph(4)), 4), [0, 4, 4, 4])
    union = G.disjoint_union(G.complete_graph(2), G.complete_graph(3))
    got = S.complement_spectrum(S.spectrum(G.laplacian(union)), 5)
    np.testing.assert_allclose(got, [0, 2, 2, 3, 5], atol=1e-12)
    np.testing.assert_allclose(got, eig(G.complete_bipartite_graph(2, 3)), atol=1e-12)
    lam = eig(G.path_graph(6))
    twice = S.complement_spectrum(S.complement_spectrum(lam, 6), 6)
    np.testing.assert_allclose(twice, lam, atol=1e-12)


def test_complement_spectrum_rejects_weighted():
    with pytest.raises(SpectralError):
        S.complement_spectrum(G.DataGraph.from_edges(3, [(0, 1, 2.0)]), 3)


def test_complement_spectrum_matches_direct(rng):
    for _ in range(30):
        n = int(rng.integers(2, 13))
        g = G.random_graph(n, float(rng.uniform(0.1, 0.9)), rng)
        np.testing.assert_allclose(S.complement_spectrum(g, n), eig(g.complement()), atol=1e-8)


@pytest.mark.parametrize("n", range(2, 10))
def test_cheeger_path(n):
    h, subset = S.cheeger_constant_bruteforce(G.path_graph(n))
    assert h == 1 / math.ceil((n - 1) / 2)


def test_cheeger_examples():
    assert S.cheeger_constant_bruteforce(G.path_graph(2))[0] == 1.0
    assert S.cheeger_constant_bruteforce(G.complete_graph(4))[0] == 2.0
    with pytest.raises(SpectralError):
        S.cheeger_constant_bruteforce(G.cycle_graph(23))


def test_cheeger_matches_itertools_oracle(rng):
    for _ in range(15):
        g = G.random_graph(int(rng.integers(2, 10)), 0.5, rng)
        h, subset = S.cheeger_constant_bruteforce(g)
        assert h == brute_cheeger(g.weights.tolist())
        assert S.cut_ratio(g, subset) == h


def test_sweep_cut_two_cliques():
    for m in (3, 4, 6):
        g = G.two_cliques_bridge(m)
        cut = S.sweep_cut(g)
        assert cut.conductance == 1 / m
        assert set(cut.subset) in ({*range(m)}, {*range(m, 2 * m)})
        assert cut.conductance == S.cheeger_constant_bruteforce(g)[0]


def test_sweep_cut_path():
    cut = S.sweep_cut(G.path_graph(5))
    assert cut.conductance == 0.5 == S.cheeger_constant_bruteforce(G.path_graph(5))[0]


def test_sweep_cut_result_invariants(rng):
    for _ in range(20):
        g = G.random_regular_graph(int(rng.integers(3, 10)) * 2, 3, rng)
        if G.connected_components(g) > 1:
            continue
        cut = S.sweep_cut(g)
        assert 0 < len(cut.subset) < g.n
        assert cut.conductance == S.cut_ratio(g, cut.subset)
        assert cut.conductance >= S.cheeger_constant_bruteforce(g)[0]
        assert cut.conductance <= S.cheeger_upper_bound(g) + 1e-12


def test_sweep_cut_requires_connected():
    with pytest.raises(SpectralError):
        S.sweep_cut(G.disjoint_union(G.complete_graph(3), G.complete_graph(3)))


def test_interlacing_example():
    r = S.check_interlacing(G.path_graph(3), (0, 2))
    np.testing.assert_allclose(r.before, [0, 1, 3], atol=1e-12)
    np.testing.assert_allclose(r.after, [0, 3, 3], atol=1e-12)
    assert r.ok and r.trace_difference == 2.0
    assert abs(r.before[0]) < 1e-12 and abs(r.after[0]) < 1e-12
    with pytest.raises(SpectralError):
        S.check_interlacing(G.path_graph(3), (0, 1))


def test_rayleigh_examples(rng):
    L = G.laplacian(G.random_regular_graph(12, 3, rng))
    sd = S.spectrum(L)
    assert S.rayleigh_lambda2(L, sd.eigenvectors[:, 1]) == pytest.approx(sd.eigenvalues[1],
                                                                          rel=1e-10)
    n = 30
    Lc = G.laplacian(G.cycle_graph(n))
    lam2 = S.spectrum(Lc).eigenvalues[1]
    q = S.rayleigh_lambda2(Lc, np.sin(2 * math.pi * np.arange(n) / n))
    assert abs(q - lam2) <= 1e-6
    for _ in range(20):
        assert S.rayleigh_lambda2(L, rng.normal(size=12)) >= sd.eigenvalues[1] - 1e-8
    with pytest.raises(SpectralError):
        S.rayleigh_lambda2(L, np.ones(12))
