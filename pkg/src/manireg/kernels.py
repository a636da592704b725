"""Positive definite kernels, Gram matrices and kernel-induced geometry.

Built-in kernels act on points of R^d (``min`` acts on nonnegative scalars).
Composite kernels are evaluated recursively from their operands, so kernels
with infinite-dimensional feature spaces compose without trouble.

Examples
--------
>>> k = Gaussian(sigma2=0.5) + Linear()
>>> G = gram_matrix(k, [[0.0, 1.0], [1.0, 0.0]])
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

#: PSD slack, relative to the largest diagonal entry of a Gram matrix.
TOL_PSD = 1e-8


class KernelError(ValueError):
    """Invalid kernel construction or evaluation."""


def _as_points(points, name="points"):
    X = np.asarray(points, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise KernelError(f"{name} must be a 2-D array of shape (n, d)")
    return X


def _as_point(x, name="x"):
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise KernelError(f"{name} must be a single point")
    return v


def _sqdist(X, Y):
    # explicit differences: coincident points give exactly 0
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


class Kernel:
    """Base class. Subclasses implement ``_cross(X, Y)``."""

    #: input dimension the kernel requires, or None for any
    dim: int | None = None

    def __call__(self, x, y) -> float:
        return self.eval(x, y)

    def eval(self, x, y) -> float:
        x = _as_point(x, "x")
        y = _as_point(y, "y")
        if x.shape != y.shape:
            raise KernelError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
        return float(self.cross(x[None, :], y[None, :])[0, 0])

    def cross(self, X, Y) -> np.ndarray:
        """Matrix of K(X[i], Y[j])."""
        X = _as_points(X, "X")
        Y = _as_points(Y, "Y")
        if X.shape[1] != Y.shape[1]:
            raise KernelError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
        self._check_dim(X.shape[1])
        return self._cross(X, Y)

    def diag(self, X) -> np.ndarray:
        X = _as_points(X)
        return np.array([self._cross(X[i:i + 1], X[i:i + 1])[0, 0] for i in range(len(X))])

    def _check_dim(self, d):
        if self.dim is not None and d != self.dim:
            raise KernelError(f"{type(self).__name__} expects dimension {self.dim}, got {d}")

    def _cross(self, X, Y):  # pragma: no cover - abstract
        raise NotImplementedError

    def spec(self) -> dict:
        """JSON-serializable description; see :func:`kernel_from_spec`."""
        raise KernelError(f"{type(self).__name__} cannot be serialized")

    def __add__(self, other):
        return Sum(self, other)

    def __mul__(self, other):
        return Product(self, other)


@dataclass(frozen=True)
class Linear(Kernel):
    def _cross(self, X, Y):
        return X @ Y.T

    def spec(self):
        return {"kind": "linear"}


@dataclass(frozen=True)
class Polynomial(Kernel):
    """``(c + <x, y>)**p``."""

    c: float = 1.0
    p: int = 2

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise KernelError("polynomial degree p must be a positive integer")
        if self.c < 0:
            raise KernelError("polynomial offset c must be nonnegative")

    def _cross(self, X, Y):
        return (self.c + X @ Y.T) ** int(self.p)

    def spec(self):
        return {"kind": "polynomial", "c": float(self.c), "p": int(self.p)}


@dataclass(frozen=True)
class Gaussian(Kernel):
    """``exp(-|x - y|^2 / (2 sigma2))``."""

    sigma2: float = 1.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise KernelError("gaussian sigma2 must be positive")

    def _cross(self, X, Y):
        return np.exp(-_sqdist(X, Y) / (2.0 * self.sigma2))

    def diag(self, X):
        return np.ones(len(_as_points(X)))

    def spec(self):
        return {"kind": "gaussian", "sigma2": float(self.sigma2)}


@dataclass(frozen=True)
class Exponential(Kernel):
    """``exp(-gamma |x - y|)``."""

    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise KernelError("exponential gamma must be positive")

    def _cross(self, X, Y):
        return np.exp(-self.gamma * np.sqrt(_sqdist(X, Y)))

    def spec(self):
        return {"kind": "exponential", "gamma": float(self.gamma)}


@dataclass(frozen=True)
class Min(Kernel):
    """Brownian-motion covariance ``min(s, t)`` on nonnegative scalars."""

    dim = 1

    def _cross(self, X, Y):
        if (X < 0).any() or (Y < 0).any():
            raise KernelError("min kernel is defined on nonnegative scalars")
        return np.minimum(X[:, 0][:, None], Y[:, 0][None, :])

    def spec(self):
        return {"kind": "min"}


@dataclass(frozen=True)
class Sum(Kernel):
    left: Kernel
    right: Kernel

    def _cross(self, X, Y):
        return self.left.cross(X, Y) + self.right.cross(X, Y)

    def spec(self):
        return {"kind": "sum", "left": self.left.spec(), "right": self.right.spec()}


@dataclass(frozen=True)
class Product(Kernel):
    left: Kernel
    right: Kernel

    def _cross(self, X, Y):
        return self.left.cross(X, Y) * self.right.cross(X, Y)

    def spec(self):
        return {"kind": "product", "left": self.left.spec(), "right": self.right.spec()}


@dataclass(frozen=True)
class ScaleByFunction(Kernel):
    """``f(x) K(x, y) f(y)`` for a real function ``f`` of one point."""

    base: Kernel
    f: Callable

    def _cross(self, X, Y):
        fx = np.array([self.f(x) for x in X], dtype=float)
        fy = np.array([self.f(y) for y in Y], dtype=float)
        return fx[:, None] * self.base.cross(X, Y) * fy[None, :]


@dataclass(frozen=True)
class Warp(Kernel):
    """``K(f(x), f(y))`` for a map ``f`` into the base kernel's domain."""

    base: Kernel
    f: Callable

    def _cross(self, X, Y):
        FX = _as_points([np.atleast_1d(self.f(x)) for x in X])
        FY = _as_points([np.atleast_1d(self.f(y)) for y in Y])
        return self.base.cross(FX, FY)


@dataclass(frozen=True)
class ExpOf(Kernel):
    base: Kernel

    def _cross(self, X, Y):
        return np.exp(self.base.cross(X, Y))

    def spec(self):
        return {"kind": "exp", "base": self.base.spec()}


@dataclass(frozen=True)
class Normalized(Kernel):
    """``K(x, y) / sqrt(K(x, x) K(y, y))``."""

    base: Kernel

    def _cross(self, X, Y):
        dx = self.base.diag(X)
        dy = self.base.diag(Y)
        if (dx <= 0).any() or (dy <= 0).any():
            raise KernelError("cannot normalize a kernel at a point with K(x, x) = 0")
        return self.base.cross(X, Y) / np.sqrt(dx[:, None] * dy[None, :])

    def diag(self, X):
        d = self.base.diag(X)
        if (d <= 0).any():
            raise KernelError("cannot normalize a kernel at a point with K(x, x) = 0")
        return np.ones(len(d))

    def spec(self):
        return {"kind": "normalized", "base": self.base.spec()}


_COMBINATORS = {
    "sum": lambda k, k2: Sum(k, k2),
    "product": lambda k, k2: Product(k, k2),
    "scale": lambda k, f: ScaleByFunction(k, f),
    "warp": lambda k, f: Warp(k, f),
    "exp": lambda k: ExpOf(k),
    "normalized": lambda k: Normalized(k),
}


def combine_kernels(op: str, *inputs) -> Kernel:
    """Apply one kernel-building rule.

    ``op`` is one of ``sum``, ``product`` (two kernels), ``scale``, ``warp``
    (a kernel and a function) or ``exp``, ``normalized`` (one kernel).
    """
    try:
        rule = _COMBINATORS[op]
    except KeyError:
        raise KernelError(f"unknown kernel combinator {op!r}") from None
    return rule(*inputs)


def eval_kernel(kernel: Kernel, x, y) -> float:
    return kernel.eval(x, y)


def gram_matrix(kernel: Kernel, points) -> np.ndarray:
    """Symmetric Gram matrix ``G[i, j] = K(points[i], points[j])``.

    The upper triangle is mirrored onto the lower one so the result is
    symmetric to the bit.
    """
    X = _as_points(points)
    if len(X) == 0:
        raise KernelError("gram_matrix needs at least one point")
    G = kernel.cross(X, X)
    iu = np.triu_indices(len(X), 1)
    G[(iu[1], iu[0])] = G[iu]
    return G


def min_eigenvalue_ok(G, tol=TOL_PSD) -> bool:
    """True when ``G`` is PSD up to ``tol`` times its largest diagonal entry."""
    scale = max(1.0, float(np.max(np.abs(np.diag(G)))))
    return float(np.linalg.eigvalsh(G)[0]) >= -tol * scale


def kernel_distance(kernel: Kernel, x, y) -> float:
    """Feature-space distance ``sqrt(K(x,x) - 2K(x,y) + K(y,y))``."""
    kxx = kernel.eval(x, x)
    kyy = kernel.eval(y, y)
    r = kxx - 2.0 * kernel.eval(x, y) + kyy
    if r < -TOL_PSD * max(1.0, abs(kxx), abs(kyy)):
        raise KernelError(f"negative squared distance {r:g}: kernel is not positive here")
    return float(np.sqrt(max(0.0, r)))


_BUILTINS = {
    "linear": (Linear, ()),
    "polynomial": (Polynomial, ("c", "p")),
    "gaussian": (Gaussian, ("sigma2",)),
    "exponential": (Exponential, ("gamma",)),
    "min": (Min, ()),
}


def kernel_from_spec(spec: dict) -> Kernel:
    """Inverse of :meth:`Kernel.spec`."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise KernelError("kernel spec must be a mapping with a 'kind' field")
    kind = spec["kind"]
    if kind in _BUILTINS:
        cls, names = _BUILTINS[kind]
        extra = set(spec) - set(names) - {"kind"}
        if extra:
            raise KernelError(f"unknown parameters for {kind} kernel: {sorted(extra)}")
        kw = {k: spec[k] for k in names if k in spec}
        if "p" in kw:
            kw["p"] = int(kw["p"])
        return cls(**kw)
    if kind in ("sum", "product"):
        return _COMBINATORS[kind](kernel_from_spec(spec["left"]), kernel_from_spec(spec["right"]))
    if kind in ("exp", "normalized"):
        return _COMBINATORS[kind](kernel_from_spec(spec["base"]))
    raise KernelError(f"unknown kernel kind {kind!r}")


def parse_kernel(text: str) -> Kernel:
    """Parse the command-line form, e.g. ``gaussian:sigma2=0.5`` or ``polynomial:c=1,p=2``."""
    name, _, params = text.partition(":")
    spec: dict = {"kind": name.strip()}
    if params.strip():
        for item in params.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise KernelError(f"bad kernel parameter {item!r}; expected key=value")
            spec[key.strip()] = float(value)
    return kernel_from_spec(spec)
