"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
under output capture).
"""
import math
import time

import numpy as np
import pytest

from manireg import graph as G
from manireg import spectral as S
from manireg.harness.datasets import ToyDatasetSpec, generate_toy_dataset
from manireg.kernels import Gaussian, Linear, gram_matrix
from manireg.learn import (
    KernelModel,
    Objective,
    classify,
    fit_lap_rls,
    fit_rls,
    lap_objective,
    predict,
    rls_regression_form,
)
from manireg.manifold import CIRCLE, convergence_experiment, median_errors

from cli_golden import SCENARIOS, run_scenario


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}"
                  + (f"  ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def central_diff(fun, a, h=1e-5):
    g = np.zeros_like(a)
    for i in range(len(a)):
        e = np.zeros_like(a)
        e[i] = h
        g[i] = (fun(a + e) - fun(a - e)) / (2 * h)
    return g


def test_criterion_01_classic_spectra(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(2, 13):
        lam = S.spectrum(G.laplacian(G.complete_graph(n))).eigenvalues
        worst = max(worst, np.max(np.abs(lam - np.r_[0.0, np.full(n - 1, float(n))])))
    for n in range(3, 13):
        lam = S.spectrum(G.laplacian(G.star_graph(n))).eigenvalues
        worst = max(worst, np.max(np.abs(lam - np.r_[0.0, np.ones(n - 2), float(n)])))
    for m in range(1, 12):
        for k in range(1, 13 - m):
            union = G.disjoint_union(G.complete_graph(m), G.complete_graph(k))
            via_complement = S.complement_spectrum(union, m + k)
            direct = np.linalg.eigvalsh(G.laplacian(G.complete_bipartite_graph(m, k)).matrix)
            worst = max(worst, np.max(np.abs(via_complement - direct)))
    elapsed = time.perf_counter() - t0
    verdict(1, "classic spectra", worst <= 1e-8 and elapsed < 1.0,
            f"max error {worst:.2e}, {elapsed:.3f}s")


def test_criterion_02_cycle_circle(verdict):
    n = 100
    sd = S.spectrum(G.laplacian(G.cycle_graph(n)))
    scaled = sd.eigenvalues * (n / (2 * math.pi)) ** 2
    rel = max(abs(scaled[i] - k * k) / (k * k) for k in (1, 2, 3) for i in (2 * k - 1, 2 * k))
    th = 2 * math.pi * np.arange(n) / n
    worst_cos = 1.0
    for k in (1, 2, 3):
        V = sd.eigenvectors[:, 2 * k - 1: 2 * k + 1]
        F = np.column_stack([np.sin(k * th), np.cos(k * th)])
        F /= np.linalg.norm(F, axis=0)
        # optimal rotation of the computed eigenspace basis onto F (Procrustes)
        U, _, Wt = np.linalg.svd(V.T @ F)
        VR = V @ (U @ Wt)
        cos = np.abs(np.sum(VR * F, axis=0))
        worst_cos = min(worst_cos, float(cos.min()))
    verdict(2, "cycle to circle", rel <= 0.02 and worst_cos >= 0.999,
            f"max relative eigenvalue gap {rel:.4f}, min |cos| {worst_cos:.6f}")


def test_criterion_03_cheeger(verdict, rng):
    path_ok = all(S.cheeger_constant_bruteforce(G.path_graph(n))[0] == 1 / math.ceil((n - 1) / 2)
                  for n in range(5, 10))
    violations = sweep_bad = tried = 0
    while tried < 50:
        n = 2 * int(rng.integers(2, 9))  # even n in 4..16
        g = G.random_regular_graph(n, 3, rng)
        if G.connected_components(g) > 1:
            continue
        tried += 1
        h, _ = S.cheeger_constant_bruteforce(g)
        lam2 = S.spectrum(G.laplacian(g)).eigenvalues[1]
        violations += h > math.sqrt(2 * 3 * lam2)
        sweep_bad += S.sweep_cut(g).conductance < h
    bridge_eq = all(S.sweep_cut(G.two_cliques_bridge(m)).conductance
                    == S.cheeger_constant_bruteforce(G.two_cliques_bridge(m))[0]
                    for m in range(2, 9))
    ok = path_ok and violations == 0 and sweep_bad == 0 and bridge_eq
    verdict(3, "Cheeger", ok, f"paths exact {path_ok}, bound violations {violations}, "
                              f"sweep below h {sweep_bad}, bridge family equal {bridge_eq}")


def test_criterion_04_interlacing(verdict, rng):
    bad = pairs = 0
    while pairs < 100:
        n = int(rng.integers(2, 13))
        g = G.random_graph(n, float(rng.uniform(0.1, 0.8)), rng)
        absent = [(i, j) for i in range(n) for j in range(i + 1, n) if not g.has_edge(i, j)]
        if not absent:
            continue
        i, j = absent[int(rng.integers(len(absent)))]
        pairs += 1
        r = S.check_interlacing(g, (i, j))
        a = np.linalg.eigvalsh(G.laplacian(g).matrix)
        b = np.linalg.eigvalsh(G.laplacian(g.with_edge(i, j)).matrix)
        chain = np.all(a <= b + 1e-8) and np.all(b[:-1] <= a[1:] + 1e-8)
        bad += not (chain and r.ok and r.trace_difference == 2.0)
    verdict(4, "edge-addition interlacing", bad == 0, f"{bad} failures in {pairs} pairs")


def test_criterion_05_heat_kernel(verdict, rng):
    identity_err = semigroup_err = 0.0
    taylor_ok = True
    for _ in range(10):
        n = int(rng.integers(3, 21))
        g = G.random_graph(n, 0.4, rng)
        L = G.laplacian(g)
        identity_err = max(identity_err,
                           np.max(np.abs(G.heat_kernel(L, 0.0).matrix - np.eye(n))))
        s, t = rng.uniform(0.05, 2.0, size=2)
        Hs, Ht, Hst = (G.heat_kernel(L, v).matrix for v in (s, t, s + t))
        semigroup_err = max(semigroup_err, np.max(np.abs(Hs @ Ht - Hst)))
        if g.degrees.min() == 0:
            continue
        # remainder of exp(-tA) after two Taylor terms: <= t^2/2 |A|^2 e^{t|A|}
        for A in (L.matrix, G.laplacian(g, normalized=True).matrix):
            nrm = np.linalg.norm(A, 2)
            ts = np.logspace(-3, -2, 6)
            C = 0.5 * nrm ** 2 * math.exp(ts[-1] * nrm)
            for tt in ts:
                H = G.heat_kernel(G.Laplacian(A, False, None), tt).matrix
                err = np.linalg.norm(H - (np.eye(n) - tt * A), 2)
                taylor_ok &= bool(err <= C * tt ** 2)
    ok = identity_err <= 1e-12 and semigroup_err <= 1e-9 and taylor_ok
    verdict(5, "heat kernel", ok, f"|H0 - I| {identity_err:.1e}, semigroup {semigroup_err:.1e}, "
                                  f"Taylor bound held {taylor_ok}")


def test_criterion_06_rls_equivalence(verdict, rng):
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 7))
        N = int(rng.integers(5, 41))
        X, Xt = rng.normal(size=(N, d)), rng.normal(size=(10, d))
        y = rng.normal(size=N)
        lam = float(rng.uniform(0.01, 1.0))
        diff = predict(fit_rls(Linear(), X, y, lam), Xt) - rls_regression_form(X, y, lam, Xt)
        worst = max(worst, float(np.max(np.abs(diff))))
    # rank-deficient Gram: linear kernel with N > d, shifted along the null space of K
    nonunique = 0.0
    for _ in range(10):
        X = rng.normal(size=(12, 3))
        y = rng.normal(size=12)
        K = gram_matrix(Linear(), X)
        a = fit_rls(Linear(), X, y, 0.1).coefficients
        null = np.linalg.svd(X.T)[2][3:].T  # columns span ker(X^T) = ker(K)
        a2 = a + null @ rng.normal(size=null.shape[1]) * 10
        obj = Objective(K, y, "squared", 0.1)
        Xt = rng.normal(size=(15, 3))
        pd = predict(KernelModel(Linear(), X, a), Xt) - predict(KernelModel(Linear(), X, a2), Xt)
        nonunique = max(nonunique, float(np.max(np.abs(pd))), abs(obj(a) - obj(a2)))
    ok = worst <= 1e-8 and nonunique <= 1e-8
    verdict(6, "RLS kernel form vs regression form", ok,
            f"max form gap {worst:.1e}, max null-space shift effect {nonunique:.1e}")


def test_criterion_07_gradients(verdict, rng):
    worst = 0.0
    X = rng.normal(size=(10, 2))
    y = np.where(rng.random(10) < 0.5, 1.0, -1.0)
    K = gram_matrix(Gaussian(1.0), X)
    L = G.laplacian(G.build_knn_graph(X, 4)).matrix
    for obj in (Objective(K, y, "logistic", 0.1),
                Objective(K, y[:4], "squared", 0.1, 5.0, L)):
        for _ in range(5):
            a = rng.normal(size=10)
            g = obj.gradient(a)
            worst = max(worst, np.linalg.norm(g - central_diff(obj, a)) / np.linalg.norm(g))
    ds, _ = generate_toy_dataset(ToyDatasetSpec("two_moons"))
    m = fit_lap_rls(Gaussian(0.1), ds, 1e-3, 1000.0, "knn:8")
    gnorm = float(np.linalg.norm(
        lap_objective(m, ds, "squared", 1e-3, 1000.0, "knn:8").gradient(m.coefficients)))
    verdict(7, "gradient oracles", worst <= 1e-5 and gnorm <= 1e-6,
            f"max relative FD gap {worst:.1e}, closed-form gradient norm {gnorm:.1e}")


def test_criterion_08_semi_supervised_win(verdict):
    t0 = time.perf_counter()
    ds, truth = generate_toy_dataset(ToyDatasetSpec("two_moons", n_per_class=100, seed=0))
    k = Gaussian(0.1)
    lap = fit_lap_rls(k, ds, 1e-3, 1000.0, "knn:8")
    rls = fit_rls(k, ds.labeled_points, ds.labels, 1e-3)
    acc_lap = float(np.mean(classify(lap, ds.points) == truth))
    acc_rls = float(np.mean(classify(rls, ds.points) == truth))
    elapsed = time.perf_counter() - t0
    ok = acc_lap >= 0.95 and acc_rls < 0.80 and elapsed < 5.0
    verdict(8, "semi-supervised win on two moons", ok,
            f"Lap-RLS {acc_lap:.3f}, RLS {acc_rls:.3f}, {elapsed:.2f}s")


def test_criterion_09_convergence(verdict):
    t0 = time.perf_counter()
    reps = convergence_experiment(CIRCLE, "sin:1", math.pi / 2, [500, 2000, 8000],
                                  a=1.0, seeds=10)
    med = median_errors(reps)
    errs = [med[500], med[2000], med[8000]]
    target = 1 / (2 * math.pi)
    assert reps[0].analytic_target == pytest.approx(target, rel=1e-8)
    nonincreasing = all(b <= a for a, b in zip(errs, errs[1:]))
    reduction = errs[0] / errs[-1]
    rel = errs[-1] / target
    elapsed = time.perf_counter() - t0
    ok = nonincreasing and reduction >= 1.5 and rel <= 0.25 and elapsed < 60
    verdict(9, "pointwise Laplacian convergence", ok,
            f"median errors {', '.join(f'{e:.4f}' for e in errs)}, reduction {reduction:.2f}x, "
            f"final relative error {rel:.3f}, {elapsed:.2f}s")


def test_criterion_10_determinism(verdict, tmp_path):
    differing = []
    for name in sorted(SCENARIOS):
        d = tmp_path / name
        d.mkdir()
        if run_scenario(name, d) != run_scenario(name, d):
            differing.append(name)
    verdict(10, "CLI determinism", not differing,
            f"{len(SCENARIOS)} golden scenarios, differing: {differing or 'none'}")
