"""Laplacian spectra and the classical facts built on them.

Eigenvalue bounds, the complement lemma, edge-addition interlacing, Cheeger
constants (exact and by sweep cut) and Rayleigh quotients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from manireg import _backend
from manireg.graph import (
    TOL_ZERO,
    DataGraph,
    GraphError,
    Laplacian,
    connected_components,
    laplacian,
)

#: Largest vertex count accepted by the exhaustive Cheeger search.
CHEEGER_MAX_N = 22


class SpectralError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self):
        return len(self.eigenvalues)

    def zero_multiplicity(self, tol=TOL_ZERO):
        lam = self.eigenvalues
        return int(np.sum(lam < tol * max(1.0, float(lam[-1]))))


@dataclass(frozen=True)
class BoundsReport:
    lambda2: float
    lambda_n: float
    fiedler_upper: float | None
    fiedler_lower_lambda_n: float
    merris_upper: float
    anderson_morley_upper: float
    trace_check: tuple
    lambda_n_le_n: bool | None
    connected: bool
    checks: dict

    def all_hold(self):
        return all(self.checks.values())


@dataclass(frozen=True)
class CutResult:
    subset: tuple
    conductance: float
    sweep_threshold: int
    boundary: float


def spectrum(lap) -> SpectralDecomposition:
    """Full eigendecomposition of a symmetric operator, eigenvalues ascending."""
    M = lap.matrix if isinstance(lap, Laplacian) else np.asarray(lap, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectralError("square matrix expected")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * scale:
        raise SpectralError("matrix is not symmetric")
    lam, P = scipy.linalg.eigh(M)
    return SpectralDecomposition(lam, P)


def boundary_size(graph: DataGraph, subset) -> float:
    """Total weight of edges leaving ``subset``."""
    mask = np.zeros(graph.n, dtype=bool)
    mask[list(subset)] = True
    return float(graph.weights[np.ix_(mask, ~mask)].sum())


def cut_ratio(graph: DataGraph, subset) -> float:
    """``|boundary(S)| / min(|S|, n - |S|)``."""
    s = len(set(subset))
    if not 0 < s < graph.n:
        raise SpectralError("subset must be nonempty and proper")
    return boundary_size(graph, subset) / min(s, graph.n - s)


def eigenvalue_bounds(graph: DataGraph, tol=1e-8) -> BoundsReport:
    """Fiedler, Merris and Anderson-Morley bounds checked against the true spectrum."""
    lam = spectrum(laplacian(graph)).eigenvalues
    n = graph.n
    d = graph.degrees
    W = graph.weights
    A = W != 0
    connected = connected_components(graph) == 1
    l2, ln = float(lam[1]) if n > 1 else 0.0, float(lam[-1])
    slack = tol * max(1.0, ln)

    nbr_count = A.sum(1)
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(nbr_count > 0, (A * d[None, :]).sum(1) / nbr_count, 0.0)
    merris = float(np.max(d + m))
    iu, ju = np.nonzero(np.triu(A, 1))
    am = float(np.max(d[iu] + d[ju])) if len(iu) else 0.0
    fiedler = n / (n - 1) * float(d.min()) if n > 1 else None
    fiedler_ln = n / (n - 1) * float(d.max()) if n > 1 else 0.0

    checks = {
        "merris": ln <= merris + slack,
        "anderson_morley": ln <= am + slack,
        "fiedler_lambda_n_lower": ln >= fiedler_ln - slack,
    }
    if connected and fiedler is not None:
        checks["fiedler_lambda2_upper"] = l2 <= fiedler + slack
    simple = graph.is_unweighted()
    trace = (float(lam.sum()), float(d.sum()))
    checks["trace_equals_degree_sum"] = abs(trace[0] - trace[1]) <= tol * max(1.0, trace[1])
    lambda_n_le_n = None
    if simple:
        lambda_n_le_n = ln <= n + slack
        checks["lambda_n_le_n"] = lambda_n_le_n
        # equality iff the complement is disconnected
        comp_disconnected = connected_components(graph.complement()) > 1
        checks["lambda_n_eq_n_iff_complement_disconnected"] = (
            abs(ln - n) <= slack) == comp_disconnected
        trace = (trace[0], 2.0 * graph.num_edges)
    return BoundsReport(
        lambda2=l2,
        lambda_n=ln,
        fiedler_upper=fiedler,
        fiedler_lower_lambda_n=fiedler_ln,
        merris_upper=merris,
        anderson_morley_upper=am,
        trace_check=trace,
        lambda_n_le_n=lambda_n_le_n,
        connected=connected,
        checks=checks,
    )


def complement_spectrum(spec, n: int) -> np.ndarray:
    """Eigenvalues of the complement graph: ``0`` and ``n - lambda_i`` for ``i >= 2``.

    Valid only for simple unweighted graphs; pass a :class:`DataGraph` or a
    graph-backed decomposition to have that checked.
    """
    if isinstance(spec, DataGraph):
        if not spec.is_unweighted():
            raise SpectralError("complement lemma needs a simple unweighted graph")
        spec = spectrum(laplacian(spec))
    lam = np.asarray(spec.eigenvalues if hasattr(spec, "eigenvalues") else spec, dtype=float)
    if len(lam) != n:
        raise SpectralError(f"expected {n} eigenvalues, got {len(lam)}")
    out = np.concatenate([[0.0], n - lam[1:][::-1]])
    return np.sort(out)


def cheeger_constant_bruteforce(graph: DataGraph):
    """Exact ``h(G)`` by enumerating every subset; returns ``(h, subset)``.

    The reported subset never contains the last vertex.
    """
    n = graph.n
    if n < 2:
        raise SpectralError("need at least 2 vertices")
    if n > CHEEGER_MAX_N:
        raise SpectralError(
            f"exhaustive search capped at n = {CHEEGER_MAX_N} (got {n}); use sweep_cut")
    boundary, size, mask = _backend.cheeger_enumerate(graph.weights)
    subset = tuple(i for i in range(n) if mask >> i & 1)
    return boundary / min(size, n - size), subset


def fiedler_vector(lap: Laplacian) -> np.ndarray:
    """Eigenvector of the second-smallest eigenvalue, sign fixed so its first nonzero entry is positive."""
    v = spectrum(lap).eigenvectors[:, 1].copy()
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if len(nz) and v[nz[0]] < 0:
        v = -v
    return v


def sweep_cut(graph: DataGraph) -> CutResult:
    """Best prefix cut along ``D^{-1/2} f2``, ``f2`` from the normalized Laplacian."""
    n = graph.n
    if n < 2:
        raise SpectralError("need at least 2 vertices")
    if connected_components(graph) != 1:
        raise SpectralError("sweep_cut needs a connected graph")
    f2 = fiedler_vector(laplacian(graph, normalized=True))
    f = f2 / np.sqrt(graph.degrees)
    order = np.argsort(f, kind="stable")
    i, boundary = _backend.sweep_scan(graph.weights, order)
    subset = tuple(sorted(int(v) for v in order[:i]))
    return CutResult(
        subset=subset,
        conductance=float(boundary[i - 1]) / min(i, n - i),
        sweep_threshold=int(i),
        boundary=float(boundary[i - 1]),
    )


def cheeger_upper_bound(graph: DataGraph) -> float:
    """``sqrt(2 d lambda2)`` for a ``d``-regular graph (unnormalized ``lambda2``)."""
    d = graph.degrees
    if not np.all(d == d[0]):
        raise SpectralError("Cheeger upper bound here is stated for regular graphs")
    lam2 = max(0.0, float(spectrum(laplacian(graph)).eigenvalues[1]))
    return math.sqrt(2.0 * d[0] * lam2)


@dataclass(frozen=True)
class InterlacingReport:
    before: np.ndarray
    after: np.ndarray
    trace_difference: float
    chain_holds: bool
    violations: list

    @property
    def ok(self):
        return self.chain_holds and self.trace_difference == 2.0


def check_interlacing(graph: DataGraph, new_edge, slack=1e-8) -> InterlacingReport:
    """Spectra before/after adding an unweighted edge, with the interlacing chain checked."""
    i, j = map(int, new_edge)
    if i == j or not (0 <= i < graph.n and 0 <= j < graph.n):
        raise SpectralError(f"invalid edge ({i}, {j})")
    if graph.has_edge(i, j):
        raise SpectralError(f"edge ({i}, {j}) already present")
    g2 = graph.with_edge(i, j, 1.0)
    L1, L2 = laplacian(graph), laplacian(g2)
    a = spectrum(L1).eigenvalues
    b = spectrum(L2).eigenvalues
    n = len(a)
    viol = []
    for k in range(n):
        if a[k] > b[k] + slack:
            viol.append(f"lambda_{k + 1}(G) > lambda_{k + 1}(G')")
        if k + 1 < n and b[k] > a[k + 1] + slack:
            viol.append(f"lambda_{k + 1}(G') > lambda_{k + 2}(G)")
    # traces from the matrices: exact for integer weights
    dtrace = float(np.trace(L2.matrix) - np.trace(L1.matrix))
    return InterlacingReport(a, b, dtrace, not viol, viol)


def rayleigh_lambda2(lap: Laplacian, trial_f, tol=1e-8) -> float:
    """Rayleigh quotient of ``trial_f`` projected off the constants; an upper bound on ``lambda2``."""
    if lap.normalized:
        raise SpectralError("expects an unnormalized Laplacian")
    f = np.asarray(trial_f, dtype=float)
    if f.shape != (lap.n,):
        raise SpectralError("trial vector has the wrong length")
    f = f - f.mean()
    nrm = np.linalg.norm(f)
    if nrm <= 1e-12 * max(1.0, float(np.abs(trial_f).max())):
        raise SpectralError("trial vector is constant; quotient undefined")
    f = f / nrm
    q = float(f @ lap.matrix @ f)
    lam2 = float(spectrum(lap).eigenvalues[1])
    if q < lam2 - tol * max(1.0, lam2):
        raise SpectralError(f"quotient {q} below lambda2 {lam2}; Laplacian is inconsistent")
    return q


def spectral_report(graph: DataGraph, normalized=False) -> dict:
    """Plain-data summary used by the CLI."""
    sd = spectrum(laplacian(graph, normalized))
    return {
        "n": graph.n,
        "normalized": normalized,
        "eigenvalues": [float(x) for x in sd.eigenvalues],
        "zero_multiplicity": sd.zero_multiplicity(),
        "components": connected_components(graph),
    }


__all__ = [
    "BoundsReport", "CutResult", "GraphError", "InterlacingReport", "SpectralDecomposition",
    "SpectralError", "boundary_size", "check_interlacing", "cheeger_constant_bruteforce",
    "cheeger_upper_bound", "complement_spectrum", "cut_ratio", "eigenvalue_bounds",
    "fiedler_vector", "rayleigh_lambda2", "spectral_report", "spectrum", "sweep_cut",
]
