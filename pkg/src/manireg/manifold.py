"""Analytic test manifolds and the pointwise graph-Laplacian convergence experiment.

The Laplace-Beltrami operator is taken with the positive sign convention,
``Delta = -div grad``, so eigenvalues are nonnegative: on a circle of radius
``r``, ``Delta sin(k theta) = (k / r)^2 sin(k theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ManifoldError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyticManifold:
    """``circle`` of radius ``radius`` in R^2, or ``flat_torus`` (S^1 x S^1 in R^4)."""

    kind: str
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("circle", "flat_torus"):
            raise ManifoldError(f"unknown manifold {self.kind!r}")
        if not self.radius > 0:
            raise ManifoldError("radius must be positive")
        if self.kind == "flat_torus" and self.radius != 1.0:
            raise ManifoldError("the flat torus is the product of two unit circles")

    @property
    def intrinsic_dim(self) -> int:
        return 1 if self.kind == "circle" else 2

    @property
    def ambient_dim(self) -> int:
        return 2 * self.intrinsic_dim

    @property
    def volume(self) -> float:
        return 2 * math.pi * self.radius if self.kind == "circle" else 4 * math.pi ** 2

    def embed(self, angles) -> np.ndarray:
        """Angles of shape (n,) for the circle or (n, 2) for the torus to ambient points."""
        th = np.asarray(angles, dtype=float)
        if self.kind == "circle":
            th = th.reshape(-1)
            return self.radius * np.column_stack([np.cos(th), np.sin(th)])
        th = th.reshape(-1, 2)
        return np.column_stack([np.cos(th[:, 0]), np.sin(th[:, 0]),
                                np.cos(th[:, 1]), np.sin(th[:, 1])])

    def angles(self, points, tol=1e-9) -> np.ndarray:
        """Inverse of :meth:`embed`; rejects points off the manifold."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[1] != self.ambient_dim:
            raise ManifoldError(f"expected points in R^{self.ambient_dim}")
        pairs = P.reshape(len(P), -1, 2)
        radii = np.linalg.norm(pairs, axis=2)
        if np.any(np.abs(radii - self.radius) > tol):
            raise ManifoldError("point is not on the manifold")
        th = np.arctan2(pairs[:, :, 1], pairs[:, :, 0])
        return th[:, 0] if self.kind == "circle" else th


CIRCLE = AnalyticManifold("circle")
FLAT_TORUS = AnalyticManifold("flat_torus")


def sample_manifold(manifold: AnalyticManifold, n: int, seed) -> np.ndarray:
    """``n`` i.i.d. uniform points, drawn as uniform angles from a PCG64 stream."""
    if n < 1:
        raise ManifoldError("n must be >= 1")
    rng = np.random.default_rng(seed)
    shape = (n,) if manifold.kind == "circle" else (n, 2)
    return manifold.embed(rng.uniform(0.0, 2 * math.pi, size=shape))


@dataclass(frozen=True)
class Eigenfunction:
    """``const``, ``sin`` or ``cos`` of ``<freq, theta>``.

    On the torus ``theta = 2 pi x`` with ``x`` in the unit square, so
    ``sin(<freq, theta>)`` is the ``sin(2 pi <y, x>)`` family.
    """

    kind: str
    freq: tuple = ()

    def __post_init__(self):
        if self.kind not in ("const", "sin", "cos"):
            raise ManifoldError(f"unknown eigenfunction kind {self.kind!r}")
        object.__setattr__(self, "freq", tuple(int(k) for k in self.freq))

    def label(self):
        if self.kind == "const":
            return "const"
        return f"{self.kind}:" + ",".join(str(k) for k in self.freq)


def parse_eigenfunction(text: str) -> Eigenfunction:
    """``const``, ``sin:1``, ``cos:2`` or, on the torus, ``sin:1,0``."""
    kind, _, arg = text.partition(":")
    if kind == "const":
        return Eigenfunction("const")
    try:
        freq = tuple(int(s) for s in arg.split(","))
    except ValueError:
        raise ManifoldError(f"malformed eigenfunction {text!r}") from None
    return Eigenfunction(kind, freq)


def _torus_frequencies():
    """Nonzero integer frequencies up to sign, ordered by |y|^2 then lexicographically."""
    out = []
    for r in range(1, 8):
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                if max(abs(a), abs(b)) == r and (a, b) > (0, 0):
                    out.append((a, b))
    return sorted(out, key=lambda y: (y[0] ** 2 + y[1] ** 2, y))


def eigenfunction_by_index(manifold: AnalyticManifold, index: int) -> Eigenfunction:
    """Enumerate the eigenbasis: 0 is the constant, then sin/cos pairs by eigenvalue."""
    if index < 0:
        raise ManifoldError("index must be nonnegative")
    if index == 0:
        return Eigenfunction("const")
    kind = "sin" if index % 2 else "cos"
    j = (index - 1) // 2
    if manifold.kind == "circle":
        return Eigenfunction(kind, (j + 1,))
    freqs = _torus_frequencies()
    if j >= len(freqs):
        raise ManifoldError("index beyond the enumerated torus eigenbasis")
    return Eigenfunction(kind, freqs[j])


def eigenvalue(manifold: AnalyticManifold, ef: Eigenfunction) -> float:
    if ef.kind == "const":
        return 0.0
    if len(ef.freq) != manifold.intrinsic_dim:
        raise ManifoldError(f"{manifold.kind} needs {manifold.intrinsic_dim} frequencies")
    return float(sum(k * k for k in ef.freq)) / manifold.radius ** 2


def _resolve(manifold, index):
    if isinstance(index, Eigenfunction):
        return index
    if isinstance(index, str):
        return parse_eigenfunction(index)
    return eigenfunction_by_index(manifold, int(index))


def eigenfunction_values(manifold: AnalyticManifold, index, points) -> np.ndarray:
    ef = _resolve(manifold, index)
    th = manifold.angles(points)
    if ef.kind == "const":
        return np.ones(len(th))
    eigenvalue(manifold, ef)  # validates the frequency count
    phase = th * ef.freq[0] if th.ndim == 1 else th @ np.asarray(ef.freq, dtype=float)
    return np.sin(phase) if ef.kind == "sin" else np.cos(phase)


def analytic_eigenfunction(manifold: AnalyticManifold, index, point):
    """``(f(point), Delta f(point))`` for an eigenfunction given by index or label."""
    ef = _resolve(manifold, index)
    v = float(eigenfunction_values(manifold, ef, np.atleast_2d(point))[0])
    return v, eigenvalue(manifold, ef) * v


def bandwidth(n: int, k: int, a: float) -> float:
    """``t_n = n^(-1 / (k + 2 + a))``, shrinking as the sample grows."""
    if not a > 0:
        raise ManifoldError("a must be positive")
    return float(n) ** (-1.0 / (k + 2 + a))


def pointwise_laplacian_estimate(points, f_values, z_index: int, t: float, k: int) -> float:
    """Scaled Gaussian-weighted graph Laplacian of ``f`` at ``points[z_index]``.

    ``(1 / (n t (4 pi t)^(k/2))) * sum_j (f(z) - f(x_j)) exp(-|z - x_j|^2 / (4 t))``.
    The ``j = z_index`` term vanishes on its own.
    """
    if not t > 0:
        raise ManifoldError("t must be positive")
    X = np.asarray(points, dtype=float)
    f = np.asarray(f_values, dtype=float)
    n = len(X)
    if not 0 <= z_index < n or len(f) != n:
        raise ManifoldError("z_index or f_values inconsistent with points")
    d2 = ((X - X[z_index]) ** 2).sum(1)
    w = np.exp(-d2 / (4.0 * t))
    s = float(np.dot(f[z_index] - f, w))
    return s / (n * t * (4.0 * math.pi * t) ** (k / 2.0))


@dataclass(frozen=True)
class ConvergenceReport:
    n: int
    t_n: float
    z: tuple
    seed: int
    estimate: float
    analytic_target: float

    @property
    def abs_error(self):
        return abs(self.estimate - self.analytic_target)


def convergence_experiment(manifold: AnalyticManifold, f_index, z, n_schedule, a=1.0,
                           seeds=10):
    """Estimate ``(1/vol) Delta f(z)`` at every ``n`` in ``n_schedule`` and every seed.

    ``z`` is an angle (circle) or pair of angles (torus). Each run places
    ``z`` at index 0 and draws ``n - 1`` uniform samples after it.
    ``seeds`` is a count (seeds ``0 .. seeds-1``) or an explicit list.
    """
    ns = [int(n) for n in n_schedule]
    if any(n < 2 for n in ns) or ns != sorted(ns):
        raise ManifoldError("n_schedule must be ascending with every n >= 2")
    seed_list = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
    ef = _resolve(manifold, f_index)
    zp = manifold.embed(np.atleast_1d(np.asarray(z, dtype=float)))
    _, lap_z = analytic_eigenfunction(manifold, ef, zp[0])
    target = lap_z / manifold.volume
    k = manifold.intrinsic_dim
    z_key = tuple(float(v) for v in np.atleast_1d(z))
    reports = []
    for n in ns:
        t = bandwidth(n, k, a)
        for seed in seed_list:
            X = np.vstack([zp, sample_manifold(manifold, n - 1, seed)])
            f = eigenfunction_values(manifold, ef, X)
            est = pointwise_laplacian_estimate(X, f, 0, t, k)
            reports.append(ConvergenceReport(n, t, z_key, seed, est, target))
    return reports


def median_errors(reports):
    """``{n: median abs_error over seeds}``."""
    by_n = {}
    for r in reports:
        by_n.setdefault(r.n, []).append(r.abs_error)
    return {n: float(np.median(v)) for n, v in sorted(by_n.items())}


def equispaced_circle(n, radius=1.0, offset=0.0):
    th = offset + 2 * math.pi * np.arange(n) / n
    return AnalyticManifold("circle", radius).embed(th)
